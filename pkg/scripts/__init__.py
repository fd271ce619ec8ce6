"""Maintenance scripts for the certificate cache."""
