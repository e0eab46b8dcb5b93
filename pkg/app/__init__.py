"""
Misperception Lab

Simulates malware-induced misperception of social-media content: a feed origin,
a rewriting man-in-the-middle proxy, an integrity detector, a reply recommender
and the statistics used to analyze responses.
"""

__version__ = "0.1.0"
__author__ = "Misperception Lab Team"
__description__ = "Simulate, detect and analyze in-transit rewriting of social-media posts"
