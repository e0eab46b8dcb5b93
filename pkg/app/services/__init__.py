# Business logic services module for the misperception lab
