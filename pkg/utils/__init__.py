"""Shared utilities: exceptions and config-file ingestion."""
