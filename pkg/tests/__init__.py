"""
Test Package
============

Test unitari per il pianificatore energetico.
"""
