"""
Configuration settings for ConflictLab

Process-level settings (logging, output, progress reporting) with environment
variable support. Experiment parameters live in scenario files, not here.
"""

from pathlib import Path
from typing import Any, Dict, Optional

from pydantic import BaseModel, Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class LoggingConfig(BaseModel):
    """Logging configuration settings."""
    level: str = Field(default="INFO", description="Log level")
    format: str = Field(
        default="%(asctime)s - %(name)s - %(levelname)s - %(message)s",
        description="Log format"
    )
    file_path: Optional[str] = Field(default=None, description="Log file path")
    max_file_size_mb: int = Field(default=10, description="Maximum log file size (MB)")
    backup_count: int = Field(default=5, description="Number of log file backups")

    @field_validator('level')
    @classmethod
    def validate_log_level(cls, v):
        valid_levels = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']
        if v.upper() not in valid_levels:
            raise ValueError(f'Log level must be one of: {valid_levels}')
        return v.upper()


class OutputConfig(BaseModel):
    """Artifact output settings."""
    default_directory: str = Field(default="./runs", description="Output directory when --out is omitted")
    xnib_path: str = Field(
        default=":memory:",
        description="SQLite file for the ledger of `run`; must not already hold records",
    )


class PerformanceConfig(BaseModel):
    """Long-run reporting settings."""
    show_progress_bars: bool = Field(default=True, description="Show tqdm progress during learning")


class LabSettings(BaseSettings):
    """
    Main configuration class for ConflictLab.

    Loads settings from environment variables with CONFLICTLAB_ prefix, then .env.
    """

    model_config = SettingsConfigDict(
        env_prefix="CONFLICTLAB_",
        env_nested_delimiter="__",
        env_file=".env",
        extra="ignore",
        case_sensitive=False,
    )

    logging: LoggingConfig = Field(default_factory=LoggingConfig)
    output: OutputConfig = Field(default_factory=OutputConfig)
    performance: PerformanceConfig = Field(default_factory=PerformanceConfig)

    debug_mode: bool = Field(default=False, description="Enable debug mode")

    def get_log_config(self, level: Optional[str] = None) -> Dict[str, Any]:
        """
        Get logging configuration dictionary.

        Args:
            level: Console level override (e.g. WARNING for --quiet)
        """
        console_level = (level or ("DEBUG" if self.debug_mode else self.logging.level)).upper()
        config = {
            'version': 1,
            'disable_existing_loggers': False,
            'formatters': {
                'standard': {
                    'format': self.logging.format
                },
            },
            'handlers': {
                'console': {
                    'class': 'logging.StreamHandler',
                    'level': console_level,
                    'formatter': 'standard',
                    'stream': 'ext://sys.stderr'
                },
            },
            'loggers': {
                'conflictlab': {
                    'level': console_level,
                    'handlers': ['console'],
                    'propagate': False
                },
                'root': {
                    'level': console_level,
                    'handlers': ['console']
                }
            }
        }

        if self.logging.file_path:
            Path(self.logging.file_path).parent.mkdir(parents=True, exist_ok=True)
            config['handlers']['file'] = {
                'class': 'logging.handlers.RotatingFileHandler',
                'level': self.logging.level,
                'formatter': 'standard',
                'filename': self.logging.file_path,
                'maxBytes': self.logging.max_file_size_mb * 1024 * 1024,
                'backupCount': self.logging.backup_count
            }
            config['loggers']['conflictlab']['handlers'].append('file')
            config['loggers']['root']['handlers'].append('file')

        return config


# Global settings instance
settings = LabSettings()


def get_settings() -> LabSettings:
    """Get the global settings instance."""
    return settings


def reload_settings() -> LabSettings:
    """Reload settings from environment variables."""
    global settings
    settings = LabSettings()
    return settings
