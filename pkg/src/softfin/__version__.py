"""
Softfin Version Information
"""

__title__ = "softfin"
__description__ = "Desk-scale laboratory for learning soft fin force control"
__version__ = "0.1.0"
__author__ = "ybhaw"
__license__ = "MIT"
