"""Command-line behavior: golden files, exit codes, determinism."""
from __future__ import annotations

import json
import socket
import subprocess
import sys
import time
from pathlib import Path

import httpx
import pytest

from semwer.cli import main

DATA = Path(__file__).parent / "data"


def run_cli(args):
    return main(args)


class TestNormalizeCommand:
    def test_golden_corpus_byte_identical(self, tmp_path):
        out = tmp_path / "norm.jsonl"
        status = run_cli(
            ["normalize", "--in", str(DATA / "raw_corpus.jsonl"), "--out", str(out)]
        )
        assert status == 0
        assert out.read_bytes() == (DATA / "normalized_golden.jsonl").read_bytes()

    def test_empty_file_succeeds_with_empty_output(self, tmp_path):
        empty = tmp_path / "empty.jsonl"
        empty.write_text("")
        out = tmp_path / "out.jsonl"
        assert run_cli(["normalize", "--in", str(empty), "--out", str(out)]) == 0
        assert out.read_text() == ""

    def test_malformed_line_cited_nonzero_exit(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"utterance_id": "u1", "raw_transcript": "hi"}\n{broken\n')
        assert run_cli(["normalize", "--in", str(bad), "--out", "-"]) == 1
        assert "2" in capsys.readouterr().err

    def test_unbalanced_markup_cited(self, tmp_path, capsys):
        bad = tmp_path / "bad.jsonl"
        bad.write_text('{"utterance_id": "u1", "raw_transcript": "[oops"}\n')
        assert run_cli(["normalize", "--in", str(bad), "--out", "-"]) == 1
        err = capsys.readouterr().err
        assert "unbalanced" in err and ":1:" in err

    def test_empty_result_excluded_but_not_fatal(self, tmp_path, capsys):
        mixed = tmp_path / "mixed.jsonl"
        mixed.write_text(
            '{"utterance_id": "u1", "raw_transcript": "[cough]"}\n'
            '{"utterance_id": "u2", "raw_transcript": "ok then"}\n'
        )
        out = tmp_path / "out.jsonl"
        assert run_cli(["normalize", "--in", str(mixed), "--out", str(out)]) == 0
        rows = [json.loads(line) for line in out.read_text().splitlines()]
        assert [r["utterance_id"] for r in rows] == ["u2"]


def write_refs(path, rows):
    path.write_text("".join(json.dumps(r) + "\n" for r in rows))


EXERCISE_REF = {
    "utterance_id": "u1",
    "speaker_id": "s1",
    "ref_with": ["HOW", "DO", "YOU", "SPELL", "EXERCISE"],
    "ref_without": ["HOW", "DO", "YOU", "SPELL", "EXERCISE"],
}


class TestScoreCommand:
    def score(self, tmp_path, hyp_text, refs=None, extra_args=()):
        refs_file = tmp_path / "refs.jsonl"
        hyps_file = tmp_path / "hyps.jsonl"
        out = tmp_path / "report.json"
        write_refs(refs_file, refs or [EXERCISE_REF])
        hyps_file.write_text(
            json.dumps({"utterance_id": "u1", "text": hyp_text}) + "\n"
        )
        status = run_cli(
            ["score", "--refs", str(refs_file), "--hyps", str(hyps_file),
             "--out", str(out), *extra_args]
        )
        assert status == 0
        return json.loads(out.read_text())

    def test_paper_example_twenty_percent(self, tmp_path):
        report = self.score(tmp_path, "how do you feel exercise")
        assert report["corpus_wer"] == pytest.approx(0.20)

    def test_paper_example_forty_percent(self, tmp_path):
        report = self.score(tmp_path, "how to spell exercise")
        assert report["corpus_wer"] == pytest.approx(0.40)

    def test_identical_files_perfect_scores(self, tmp_path):
        report = self.score(tmp_path, "how do you spell exercise")
        assert report["corpus_wer"] == 0.0
        assert report["corpus_semscore"] == pytest.approx(1.0)

    def test_components_flag(self, tmp_path):
        report = self.score(tmp_path, "how do you spell exercise",
                            extra_args=["--components"])
        assert report["per_utterance"][0]["components"]["soundex"] == pytest.approx(1.0)
        bare = self.score(tmp_path, "how do you spell exercise")
        assert "components" not in bare["per_utterance"][0]

    def test_hypothesis_order_does_not_matter(self, tmp_path):
        refs = [
            EXERCISE_REF,
            {"utterance_id": "u2", "speaker_id": "s2",
             "ref_with": ["GOOD", "DAY"], "ref_without": ["GOOD", "DAY"]},
        ]
        refs_file = tmp_path / "refs.jsonl"
        write_refs(refs_file, refs)
        hyp_rows = [
            {"utterance_id": "u1", "text": "how do you spell exercise"},
            {"utterance_id": "u2", "text": "good night"},
        ]
        outputs = []
        for order in (hyp_rows, list(reversed(hyp_rows))):
            hyps_file = tmp_path / "hyps.jsonl"
            hyps_file.write_text("".join(json.dumps(r) + "\n" for r in order))
            out = tmp_path / "report.json"
            run_cli(["score", "--refs", str(refs_file), "--hyps", str(hyps_file),
                     "--out", str(out)])
            outputs.append(out.read_text())
        assert outputs[0] == outputs[1]

    def test_id_mismatch_nonzero(self, tmp_path, capsys):
        refs_file = tmp_path / "refs.jsonl"
        hyps_file = tmp_path / "hyps.jsonl"
        write_refs(refs_file, [EXERCISE_REF])
        hyps_file.write_text(json.dumps({"utterance_id": "zz", "text": "hi"}) + "\n")
        status = run_cli(
            ["score", "--refs", str(refs_file), "--hyps", str(hyps_file), "--out", "-"]
        )
        assert status == 1
        assert "missing" in capsys.readouterr().err

    def test_score_sem_alias(self, tmp_path):
        refs_file = tmp_path / "refs.jsonl"
        hyps_file = tmp_path / "hyps.jsonl"
        out = tmp_path / "sem.json"
        write_refs(refs_file, [EXERCISE_REF])
        hyps_file.write_text(
            json.dumps({"utterance_id": "u1", "text": "how do you spell exercise"}) + "\n"
        )
        status = run_cli(["score-sem", "--refs", str(refs_file), "--hyps", str(hyps_file),
                          "--out", str(out), "--components"])
        assert status == 0
        report = json.loads(out.read_text())
        assert report["per_utterance"][0]["components"]["nli"] == pytest.approx(1.0)

    def test_wer_only_metrics(self, tmp_path):
        report = self.score(tmp_path, "how do you feel exercise",
                            extra_args=["--metrics", "wer"])
        assert report["corpus_wer"] == pytest.approx(0.20)
        assert report["corpus_semscore"] is None
        assert "semscore" not in report["per_utterance"][0]

    def test_weights_from_inline_and_file(self, tmp_path):
        weights_file = tmp_path / "w.json"
        weights_file.write_text(json.dumps({"alpha": 0.5, "beta": 0.3, "gamma": 0.2}))
        for spec in ("0.5,0.3,0.2", str(weights_file)):
            report = self.score(tmp_path, "how do you spell exercise",
                                extra_args=["--weights", spec])
            assert report["weights"] == {"alpha": 0.5, "beta": 0.3, "gamma": 0.2}


class TestFitWeightsCommand:
    def make_ratings(self, path, n=100):
        import numpy as np

        rng = np.random.default_rng(2)
        rows = []
        for _ in range(n):
            nli, bert, sx = rng.uniform(0, 1, size=3)
            rows.append({
                "nli": nli, "bert": bert, "soundex": sx,
                "rating": 0.40 * nli + 0.28 * bert + 0.32 * sx,
            })
        path.write_text("".join(json.dumps(r) + "\n" for r in rows))

    def test_synthetic_recovery(self, tmp_path):
        ratings = tmp_path / "ratings.jsonl"
        out = tmp_path / "weights.json"
        self.make_ratings(ratings)
        assert run_cli(["fit-weights", "--ratings", str(ratings), "--out", str(out)]) == 0
        result = json.loads(out.read_text())
        assert result["weights"]["alpha"] == pytest.approx(0.40, abs=1e-6)
        assert result["weights"]["beta"] == pytest.approx(0.28, abs=1e-6)
        assert result["weights"]["gamma"] == pytest.approx(0.32, abs=1e-6)
        assert max(result["cv"]["mse"]) < 1e-12

    def test_deterministic_across_runs(self, tmp_path):
        ratings = tmp_path / "ratings.jsonl"
        self.make_ratings(ratings, n=40)
        outputs = []
        for name in ("a.json", "b.json"):
            out = tmp_path / name
            run_cli(["fit-weights", "--ratings", str(ratings), "--seed", "3",
                     "--out", str(out)])
            outputs.append(out.read_text())
        assert outputs[0] == outputs[1]

    def test_too_few_rows(self, tmp_path, capsys):
        ratings = tmp_path / "ratings.jsonl"
        self.make_ratings(ratings, n=3)
        assert run_cli(["fit-weights", "--ratings", str(ratings), "--out", "-"]) == 1
        assert "fold" in capsys.readouterr().err

    def test_stub_scored_pairs_are_rank_deficient(self, tmp_path, capsys):
        # the stub backend pins nli == bert, so pair-only input cannot have
        # full column rank; the command must say so rather than fit garbage
        ratings = tmp_path / "ratings.jsonl"
        rows = []
        for i in range(12):
            rows.append({"ref": f"word{i} extra", "hyp": f"word{i} extra", "rating": 1.0})
            rows.append({"ref": f"aa{i} bb{i}", "hyp": f"zz{i}", "rating": 0.0})
        ratings.write_text("".join(json.dumps(r) + "\n" for r in rows))
        assert run_cli(["fit-weights", "--ratings", str(ratings), "--out", "-"]) == 1
        assert "rank" in capsys.readouterr().err

    def test_mixed_component_and_pair_rows(self, tmp_path):
        import numpy as np

        rng = np.random.default_rng(8)
        ratings = tmp_path / "ratings.jsonl"
        rows = []
        for _ in range(30):
            nli, bert, sx = rng.uniform(0, 1, size=3)
            rows.append({"nli": nli, "bert": bert, "soundex": sx,
                         "rating": 0.4 * nli + 0.28 * bert + 0.32 * sx})
        rows.append({"ref": "go home now", "hyp": "go home now", "rating": 1.0})
        ratings.write_text("".join(json.dumps(r) + "\n" for r in rows))
        out = tmp_path / "w.json"
        assert run_cli(["fit-weights", "--ratings", str(ratings), "--out", str(out)]) == 0
        result = json.loads(out.read_text())
        assert result["n_samples"] == 31


class TestSplitCommand:
    def make_manifest(self, path, n=24):
        rows = []
        for i in range(n):
            rows.append({
                "utterance_id": f"u{i:03d}",
                "speaker_id": f"s{i % 12}",
                "duration_s": 3.0 + (i % 5),
                "raw_transcript": f"line number {i % 8} spoken",
            })
        path.write_text("".join(json.dumps(r) + "\n" for r in rows))

    def test_deterministic_with_seed(self, tmp_path):
        manifest = tmp_path / "manifest.jsonl"
        self.make_manifest(manifest)
        outputs = []
        for name in ("a.jsonl", "b.jsonl"):
            out = tmp_path / name
            assert run_cli(["split", "--manifest", str(manifest), "--seed", "5",
                            "--out", str(out)]) == 0
            outputs.append(out.read_text())
        assert outputs[0] == outputs[1]

    def test_output_schema_and_dataset_out(self, tmp_path):
        manifest = tmp_path / "manifest.jsonl"
        self.make_manifest(manifest)
        out = tmp_path / "splits.jsonl"
        dataset = tmp_path / "dataset.jsonl"
        run_cli(["split", "--manifest", str(manifest), "--out", str(out),
                 "--dataset-out", str(dataset)])
        rows = [json.loads(line) for line in out.read_text().splitlines()]
        assert all(set(r) == {"utterance_id", "split", "unshared"} for r in rows)
        assert {r["split"] for r in rows} <= {"Train", "Dev", "Test1", "Test2"}
        dataset_rows = [json.loads(line) for line in dataset.read_text().splitlines()]
        assert all("ref_with" in r and "ref_without" in r for r in dataset_rows)


class TestCompareCommand:
    def test_comparison_and_csv(self, tmp_path):
        paths = []
        for i, (wer, sem) in enumerate([(0.1, 0.9), (0.2, 0.8), (0.3, 0.7)]):
            path = tmp_path / f"report{i}.json"
            path.write_text(json.dumps({"corpus_wer": wer, "corpus_semscore": sem}))
            paths.append(str(path))
        out = tmp_path / "cmp.json"
        csv_out = tmp_path / "cmp.csv"
        assert run_cli(["compare", *paths, "--out", str(out),
                        "--csv-out", str(csv_out)]) == 0
        result = json.loads(out.read_text())
        assert result["pearson_wer_semscore"] == pytest.approx(-1.0)
        assert csv_out.read_text().splitlines()[0] == "system,wer,semscore"


def free_port():
    with socket.socket() as sock:
        sock.bind(("127.0.0.1", 0))
        return sock.getsockname()[1]


def write_service_config(tmp_path, port):
    dataset = tmp_path / "dataset.jsonl"
    dataset.write_text(json.dumps({
        "utterance_id": "t1", "split": "Test1", "unshared": True,
        "ref_with": ["HI", "THERE"], "ref_without": ["HI", "THERE"],
    }) + "\n" + json.dumps({
        "utterance_id": "t2", "split": "Test2", "unshared": True,
        "ref_with": ["BYE", "NOW"], "ref_without": ["BYE", "NOW"],
    }) + "\n")
    config = tmp_path / "service.json"
    config.write_text(json.dumps({
        "data_dir": str(tmp_path / "state"),
        "dataset_path": str(dataset),
        "admin_token": "tok",
        "listen_port": port,
    }))
    return config


@pytest.mark.slow
class TestServeCommand:
    def test_busy_port_rejected(self, tmp_path):
        with socket.socket() as blocker:
            blocker.bind(("127.0.0.1", 0))
            blocker.listen(1)
            port = blocker.getsockname()[1]
            config = write_service_config(tmp_path, port)
            proc = subprocess.run(
                [sys.executable, "-m", "semwer.cli", "serve", "--config", str(config)],
                capture_output=True, timeout=60,
            )
            assert proc.returncode != 0

    def test_end_to_end_submit_and_rank(self, tmp_path):
        port = free_port()
        config = write_service_config(tmp_path, port)
        proc = subprocess.Popen(
            [sys.executable, "-m", "semwer.cli", "serve", "--config", str(config)],
            stdout=subprocess.PIPE, stderr=subprocess.PIPE,
        )
        base = f"http://127.0.0.1:{port}"
        try:
            deadline = time.time() + 30
            while True:
                try:
                    httpx.get(base + "/v1/leaderboard/public", timeout=1.0)
                    break
                except httpx.HTTPError:
                    if time.time() > deadline:
                        raise RuntimeError("service never came up")
                    time.sleep(0.2)
            auth = {"Authorization": "Bearer tok"}
            assert httpx.post(base + "/v1/admin/teams", json={"team_id": "crew"},
                              headers=auth).status_code == 200
            hyps = (json.dumps({"utterance_id": "t1", "text": "hi there"}) + "\n"
                    + json.dumps({"utterance_id": "t2", "text": "bye now"}) + "\n")
            response = httpx.post(
                base + "/v1/submissions",
                json={"team_id": "crew", "hypotheses": hyps},
            )
            assert response.status_code == 202
            submission_id = response.json()["submission_id"]
            deadline = time.time() + 30
            while True:
                detail = httpx.get(base + f"/v1/submissions/{submission_id}").json()
                if detail["status"] in ("Done", "Failed"):
                    break
                if time.time() > deadline:
                    raise RuntimeError("scoring never finished")
                time.sleep(0.2)
            assert detail["status"] == "Done"
            assert detail["test1"]["wer"] == 0.0
            board = httpx.get(base + "/v1/leaderboard/public").json()
            assert board["entries"][0]["team_id"] == "crew"
            assert board["entries"][0]["best_wer"] == 0.0
        finally:
            proc.terminate()
            proc.wait(timeout=10)
