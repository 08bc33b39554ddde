"""
Views Package
=============

Interfaccia a riga di comando dell'applicazione.
"""

from .cli import CommandLineView, build_parser, main

__all__ = ["CommandLineView", "build_parser", "main"]
