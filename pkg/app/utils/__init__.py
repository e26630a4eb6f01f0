"""
Utility Functions
"""
