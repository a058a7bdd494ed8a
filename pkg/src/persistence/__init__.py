"""
Module de persistance des rapports
"""

from src.persistence.report_store import ReportStore

__all__ = ['ReportStore']
