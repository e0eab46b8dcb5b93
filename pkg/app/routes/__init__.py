# API routes module for the misperception lab
