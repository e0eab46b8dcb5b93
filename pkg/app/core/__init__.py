# Core configuration module for the misperception lab
