"""Core functionality for change-set estimation by overlapping CUSUM scanning."""
