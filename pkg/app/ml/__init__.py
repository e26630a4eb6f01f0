"""
Machine Learning Pipeline
"""
