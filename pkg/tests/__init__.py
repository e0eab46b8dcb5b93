# Tests module for the misperception lab