import json
from concurrent.futures import ThreadPoolExecutor

import numpy as np
import pytest

from models import CheckResult
from utils.cache import SpectrumCache
from utils.checks import CheckRecorder
from utils.errors import GridTooShortError, VerificationFailure
from utils.finite_difference import first_derivative, interior, second_derivative
from utils.output_writer import render_csv, render_json, resolve_output, write_atomic


class TestFiniteDifference:
    def test_quartic_is_exact(self):
        xs = np.linspace(-1.0, 2.0, 31)
        dx = xs[1] - xs[0]
        values = xs**4 - 2.0 * xs**3 + xs
        np.testing.assert_allclose(first_derivative(values, dx), 4 * xs**3 - 6 * xs**2 + 1, atol=1e-10)
        np.testing.assert_allclose(second_derivative(values, dx), 12 * xs**2 - 12 * xs, atol=1e-8)

    def test_complex_exponential(self):
        xs = np.linspace(0.0, 3.0, 601)
        dx = xs[1] - xs[0]
        values = np.exp(1j * xs)
        gap = np.max(np.abs(interior(second_derivative(values, dx) + values)))
        assert gap < 1e-9

    def test_fourth_order_convergence(self):
        gaps = []
        for n in (101, 201):
            xs = np.linspace(0.0, 2.0, n)
            gaps.append(np.max(np.abs(first_derivative(np.sin(xs), xs[1] - xs[0]) - np.cos(xs))))
        assert gaps[0] / gaps[1] > 12.0

    @pytest.mark.parametrize("derivative, count", [(first_derivative, 4), (second_derivative, 5)])
    def test_short_grid(self, derivative, count):
        with pytest.raises(GridTooShortError):
            derivative(np.ones(count), 0.1)


class TestCheckRecorder:
    def test_summary(self):
        recorder = CheckRecorder()
        recorder.check_below("small", 1e-9, 1e-6)
        recorder.check_below("large", 0.5, 1e-6, "gap")
        assert recorder.failed == ["large"]
        assert recorder.get_summary() == {"total": 2, "passed": 1, "failed": 1, "status": "fail"}
        assert recorder.results[1].detail == "gap = 5.000e-01 (limit 1e-06)"

    def test_raise_on_failure(self):
        recorder = CheckRecorder()
        recorder.record("ok", True)
        recorder.raise_on_failure()
        recorder.record("broken", False, "off by one")
        with pytest.raises(VerificationFailure) as excinfo:
            recorder.raise_on_failure()
        assert excinfo.value.failed_checks == ["broken"]

    def test_serialized_with_pass_key(self):
        result = CheckResult(name="x", passed=True)
        assert json.loads(render_json(result)) == {"name": "x", "pass": True, "detail": ""}


class TestOutputWriter:
    def test_json_is_sorted_and_plain(self):
        text = render_json({"b": np.float64(0.1), "a": [1 + 2j], "c": np.arange(2)})
        assert list(json.loads(text)) == ["a", "b", "c"]
        assert json.loads(text)["a"] == [{"re": 1.0, "im": 2.0}]
        assert json.loads(text)["c"] == [0, 1]
        assert text.endswith("\n")

    def test_json_rejects_nan(self):
        with pytest.raises(ValueError):
            render_json({"gap": float("nan")})

    def test_csv_round_trips_floats(self):
        text = render_csv(["x", "y"], [(0.1, None), (1 / 3, 2)])
        assert text == "x,y\n0.1,\n0.3333333333333333,2\n"

    def test_csv_rejects_ragged_rows(self):
        with pytest.raises(ValueError):
            render_csv(["x", "y"], [(1.0,)])

    def test_csv_rejects_inf(self):
        with pytest.raises(ValueError):
            render_csv(["x"], [(float("inf"),)])

    def test_relative_path_uses_output_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv("SL2C_OUTPUT_DIR", str(tmp_path))
        assert resolve_output("run.json") == tmp_path / "run.json"
        assert resolve_output(str(tmp_path / "abs.json")) == tmp_path / "abs.json"
        assert resolve_output(None) is None

    def test_atomic_write_leaves_no_temporaries(self, tmp_path):
        target = tmp_path / "nested" / "out.csv"
        write_atomic("a\n", target)
        write_atomic("b\n", target)
        assert target.read_text() == "b\n"
        assert [p.name for p in target.parent.iterdir()] == ["out.csv"]


class TestSpectrumCache:
    def test_key_ignores_dict_order(self):
        cache = SpectrumCache(max_size=4)
        assert cache.generate_key("s", {"a": 1, "b": 2}) == cache.generate_key("s", {"b": 2, "a": 1})
        assert cache.generate_key("s", {"a": 1}) != cache.generate_key("s", {"a": 2})

    def test_oldest_entry_evicted(self):
        cache = SpectrumCache(max_size=10)
        for i in range(11):
            cache.set(f"k{i}", i)
        assert len(cache) == 10
        assert cache.get("k0") is None
        assert cache.get("k10") == 10

    def test_stats(self):
        cache = SpectrumCache(max_size=2)
        cache.set("a", 1)
        cache.get("a")
        cache.get("b")
        stats = cache.stats()
        assert (stats["hits"], stats["misses"], stats["hit_rate"]) == (1, 1, "50.0%")

    def test_concurrent_writers_respect_capacity(self):
        cache = SpectrumCache(max_size=16)

        def work(worker):
            for i in range(200):
                cache.set(f"w{worker}-{i}", i)
                cache.get(f"w{worker}-{i // 2}")
            return worker

        with ThreadPoolExecutor(max_workers=8) as pool:
            assert sorted(pool.map(work, range(8))) == list(range(8))
        assert len(cache) <= 16
        stats = cache.stats()
        assert stats["total_requests"] == 8 * 200

    def test_size_must_be_positive(self):
        with pytest.raises(ValueError):
            SpectrumCache(max_size=0)
