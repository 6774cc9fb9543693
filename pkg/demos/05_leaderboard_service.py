#!/usr/bin/env python3
"""Run a miniature challenge end to end: submissions, scoring, leaderboards.

Everything happens in-process against a temporary data directory; the same
flow works over HTTP via `semwer serve`.
"""
import json
import tempfile
from pathlib import Path

from semwer.errors import UnauthorizedError
from semwer.service import ChallengeService, ServiceConfig

ADMIN = "demo-admin-token"

DATASET = [
    {"utterance_id": "t1-001", "split": "Test1", "unshared": True,
     "ref_with": ["UM", "GOOD", "MORNING"], "ref_without": ["GOOD", "MORNING"]},
    {"utterance_id": "t1-002", "split": "Test1", "unshared": True,
     "ref_with": ["HOW", "DO", "YOU", "SPELL", "EXERCISE"],
     "ref_without": ["HOW", "DO", "YOU", "SPELL", "EXERCISE"]},
    {"utterance_id": "t2-001", "split": "Test2", "unshared": True,
     "ref_with": ["SEE", "YOU", "SOON"], "ref_without": ["SEE", "YOU", "SOON"]},
]

SUBMISSIONS = {
    "team-precise": {
        "t1-001": "good morning",
        "t1-002": "how do you spell exercise",
        "t2-001": "see you soon",
    },
    "team-sloppy": {
        "t1-001": "good mourning to you",
        "t1-002": "how do you feel exercise",
        "t2-001": "sea you son",
    },
}


def hypothesis_file(rows: dict) -> str:
    return "".join(
        json.dumps({"utterance_id": k, "text": v}) + "\n" for k, v in rows.items()
    )


def main() -> None:
    with tempfile.TemporaryDirectory() as workdir:
        dataset_path = Path(workdir) / "dataset.jsonl"
        dataset_path.write_text("".join(json.dumps(r) + "\n" for r in DATASET))
        config = ServiceConfig(
            data_dir=str(Path(workdir) / "state"),
            dataset_path=str(dataset_path),
            admin_token=ADMIN,
        )
        service = ChallengeService(config)
        try:
            for team, rows in SUBMISSIONS.items():
                service.register_team(team, ADMIN)
                submission_id = service.submit(team, hypothesis_file(rows))
                print(f"{team}: submitted {submission_id[:8]}...")
            service.wait_idle()

            print("\npublic leaderboard (Test1):")
            for i, entry in enumerate(service.public_leaderboard(), start=1):
                print(f"  {i}. {entry.team_id:14s} WER {entry.best_wer * 100:6.2f}%"
                      f"  SemScore {entry.best_semscore * 100:6.2f}%")

            try:
                service.private_leaderboard()
            except UnauthorizedError:
                print("\nprivate leaderboard: locked until the challenge concludes")

            service.conclude(ADMIN)
            print("\nafter conclude(), Test2 results are public:")
            for i, entry in enumerate(service.private_leaderboard(), start=1):
                print(f"  {i}. {entry.team_id:14s} WER {entry.best_wer * 100:6.2f}%"
                      f"  SemScore {entry.best_semscore * 100:6.2f}%")
        finally:
            service.close()


if __name__ == "__main__":
    main()
