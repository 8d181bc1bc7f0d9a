"""epolis: a survey-gamification game server.

Players roam a grid city, must answer dilemma prompts to proceed, and every
accepted event lands in an append-only log that reconstructs all state.
"""

__version__ = "0.1.0"
