"""Test suite for the fusion plausibility toolkit."""
