"""
The 'firstnature.api' module defines the result interface shared by all estimation routines.
"""
