"""Tests for secrecy-region."""
