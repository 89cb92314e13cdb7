"""Tests for derandkit"""
