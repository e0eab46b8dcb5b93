# Data models module for the misperception lab
