"""Test suite for the ring walk toolkit."""
