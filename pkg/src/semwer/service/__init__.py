"""Challenge evaluation service: submissions, scoring, dual leaderboards."""
from .core import (
    ChallengeDataset,
    ChallengeService,
    LeaderboardEntry,
    ServiceConfig,
    Submission,
)
from .http import create_app

__all__ = [
    "ChallengeDataset",
    "ChallengeService",
    "LeaderboardEntry",
    "ServiceConfig",
    "Submission",
    "create_app",
]
