"""Optical Thomas rotation library."""
