# Utility functions module for the misperception lab
