"""Trimming schedules and norming sequences."""
