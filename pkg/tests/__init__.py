"""Tests for cone-cubature."""
