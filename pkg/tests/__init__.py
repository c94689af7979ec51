"""Tests for the optical Thomas rotation library."""
