"""Tests for senlab."""
