import argparse
import io

import pytest

from catsearch.cli import (
    EXIT_IO,
    EXIT_OK,
    EXIT_PROPERTY_FAILURE,
    EXIT_USAGE,
    _effective_seed,
    cmd_session,
    main,
)
from catsearch.harness import parse_csv
from catsearch.strategies import StrategyKind


class TestSweepCommand:
    def test_writes_csv(self, tmp_path):
        out = tmp_path / "fun16.csv"
        code = main(["sweep", "--strategy", "fun", "--n", "16", "--out", str(out)])
        assert code == EXIT_OK
        rows = parse_csv(out)
        assert len(rows) == 17
        assert all(r.strategy is StrategyKind.FUN for r in rows)

    def test_zero_n_is_usage_error(self, tmp_path):
        out = tmp_path / "x.csv"
        code = main(["sweep", "--strategy", "fun", "--n", "0", "--out", str(out)])
        assert code == EXIT_USAGE
        assert not out.exists()

    def test_unwritable_out_is_io_error(self, tmp_path):
        out = tmp_path / "nope" / "x.csv"
        code = main(["sweep", "--strategy", "fun", "--n", "4", "--out", str(out)])
        assert code == EXIT_IO

    def test_unknown_strategy_is_usage_error(self, tmp_path, capsys):
        code = main(
            ["sweep", "--strategy", "astrology", "--n", "4", "--out", str(tmp_path / "x")]
        )
        assert code == EXIT_USAGE

    def test_unknown_flag_is_usage_error(self):
        assert main(["sweep", "--bogus", "1"]) == EXIT_USAGE


class TestCompareCommand:
    def test_multiple_strategies_one_csv(self, tmp_path):
        out = tmp_path / "cmp.csv"
        code = main(
            ["compare", "--strategies", "fun,binary", "--n", "8", "--out", str(out)]
        )
        assert code == EXIT_OK
        rows = parse_csv(out)
        assert {r.strategy for r in rows} == {StrategyKind.FUN, StrategyKind.BINARY}
        assert len(rows) == 18

    def test_bad_name_in_list(self, tmp_path):
        code = main(
            ["compare", "--strategies", "fun,nope", "--n", "8", "--out", str(tmp_path / "x")]
        )
        assert code == EXIT_USAGE

    def test_empty_list(self, tmp_path):
        code = main(
            ["compare", "--strategies", ",", "--n", "8", "--out", str(tmp_path / "x")]
        )
        assert code == EXIT_USAGE


class TestVerifyCommand:
    def test_smoke_passes(self, capsys):
        code = main(["verify", "--n-max", "16"])
        assert code == EXIT_OK
        out = capsys.readouterr().out
        assert "OVERALL PASS" in out
        assert "PASS exhaustive_correctness" in out

    def test_small_n_max_is_usage_error(self):
        assert main(["verify", "--n-max", "4"]) == EXIT_USAGE


class TestSessionCommand:
    def run_session(self, strategy, n, answers):
        stdin = io.StringIO("".join(a + "\n" for a in answers))
        stdout = io.StringIO()
        code = cmd_session(StrategyKind(strategy), n, stdin=stdin, stdout=stdout)
        return code, stdout.getvalue()

    def test_fun_threshold_five_walk(self):
        code, out = self.run_session(
            "fun", 16, ["pass", "pass", "pass", "fail", "pass", "fail"]
        )
        assert code == EXIT_OK
        lines = out.splitlines()
        assert lines[:6] == [
            "PROBE 1",
            "PROBE 2",
            "PROBE 4",
            "PROBE 8",
            "PROBE 5",
            "PROBE 6",
        ]
        assert lines[-1] == "RESULT 5 NEGATIVES 2 TOTAL 6"

    def test_quit_mid_session(self):
        code, out = self.run_session("binary", 7, ["pass", "quit"])
        assert code == EXIT_OK
        assert "RESULT" not in out

    def test_garbage_answer(self):
        code, out = self.run_session("binary", 7, ["maybe"])
        assert code == EXIT_USAGE

    def test_closed_stdin(self):
        code, out = self.run_session("binary", 7, [])
        assert code == EXIT_USAGE

    def test_matches_http_protocol(self):
        # The line protocol and the HTTP protocol must agree on identical
        # outcome sequences.
        from fastapi.testclient import TestClient

        from catsearch.service import SessionStore, create_app

        code, out = self.run_session(
            "frustrating", 16, ["pass", "pass", "pass", "fail", "pass"]
        )
        assert code == EXIT_OK
        assert out.splitlines()[-1] == "RESULT 7 NEGATIVES 1 TOTAL 5"

        import tempfile
        from pathlib import Path

        with tempfile.TemporaryDirectory() as td:
            store = SessionStore(Path(td) / "events.jsonl")
            with TestClient(create_app(store)) as client:
                sid = client.post(
                    "/sessions",
                    json={"strategy": "frustrating", "n": 16, "mode": "live"},
                ).json()["id"]
                for word in ("pass", "pass", "pass", "fail", "pass"):
                    client.get(f"/sessions/{sid}/next")
                    client.post(f"/sessions/{sid}/answer", json={"outcome": word})
                final = client.get(f"/sessions/{sid}/next").json()
            store.close()
        assert final["result"] == 7
        assert final["frustration"] == {"negatives": 1, "total": 5}


class TestSeedPlumbing:
    def test_flag_wins(self, monkeypatch):
        monkeypatch.setenv("CAT_SEED", "99")
        args = argparse.Namespace(seed=5)
        assert _effective_seed(args) == 5

    def test_env_fallback(self, monkeypatch):
        monkeypatch.setenv("CAT_SEED", "99")
        args = argparse.Namespace(seed=None)
        assert _effective_seed(args) == 99

    def test_default_zero(self, monkeypatch):
        monkeypatch.delenv("CAT_SEED", raising=False)
        args = argparse.Namespace(seed=None)
        assert _effective_seed(args) == 0

    def test_bad_env_is_usage_error(self, monkeypatch):
        monkeypatch.setenv("CAT_SEED", "elephant")
        with pytest.raises(SystemExit) as excinfo:
            _effective_seed(argparse.Namespace(seed=None))
        assert excinfo.value.code == EXIT_USAGE
