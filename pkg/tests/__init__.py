# Test package for ConflictLab
