"""End-to-end tests of the command line interface."""

import csv
import json
import os

import numpy as np
import pytest

from overlap_lab.cli import _apply_thread_cap, _complex_arg, main


def read_csv(path):
    with open(path, newline="") as fh:
        lines = [l for l in fh if not l.startswith("#")]
    return list(csv.DictReader(lines))


def run_sample(tmp_path, name="run", ensemble="ginibre", n=12, samples=3,
               seed=7, extra=()):
    out = tmp_path / name
    rc = main(["sample", "--ensemble", ensemble, "--n", str(n),
               "--samples", str(samples), "--seed", str(seed),
               "--out", str(out), *extra])
    assert rc == 0
    return out


class TestArgs:
    def test_complex_arg(self):
        assert _complex_arg("2") == 2.0 + 0.0j
        assert _complex_arg("1.5,-0.5") == 1.5 - 0.5j
        with pytest.raises(Exception):
            _complex_arg("1,2,3")

    def test_thread_cap(self, monkeypatch):
        monkeypatch.setenv("OVERLAP_LAB_THREADS", "3")
        monkeypatch.delenv("OMP_NUM_THREADS", raising=False)
        _apply_thread_cap()
        assert os.environ["OMP_NUM_THREADS"] == "3"


class TestSample:
    def test_outputs_and_manifest(self, tmp_path):
        out = run_sample(tmp_path, n=10, samples=3)
        eigen = read_csv(out / "eigen.csv")
        pairs = read_csv(out / "pairs.csv")
        assert len(eigen) == 3 * 10
        assert len(pairs) == 3 * 10 * 9
        with open(out / "manifest.json") as fh:
            manifest = json.load(fh)
        assert manifest["command"] == "sample"
        assert manifest["seed"] == 7
        assert set(manifest["outputs"]) == {"eigen.csv", "pairs.csv"}
        # overlap row sums: per (sample, k) the pair rows plus the diagonal
        # entry must sum to one
        diag = {(r["sample_id"], r["k"]): float(r["o_kk"]) for r in eigen}
        sums = {}
        for r in pairs:
            key = (r["sample_id"], r["k"])
            sums[key] = sums.get(key, 0.0) + float(r["re_o_kl"])
        for key, off_sum in sums.items():
            assert off_sum + diag[key] == pytest.approx(1.0, abs=1e-8)

    def test_rerun_byte_identical(self, tmp_path):
        a = run_sample(tmp_path, name="a")
        b = run_sample(tmp_path, name="b")
        assert (a / "eigen.csv").read_bytes() == (b / "eigen.csv").read_bytes()
        assert (a / "pairs.csv").read_bytes() == (b / "pairs.csv").read_bytes()

    def test_pair_thinning(self, tmp_path):
        dense = run_sample(tmp_path, name="dense")
        thin = run_sample(tmp_path, name="thin",
                          extra=("--min-separation", "0.3"))
        assert len(read_csv(thin / "pairs.csv")) < \
            len(read_csv(dense / "pairs.csv"))


class TestEstimate:
    def test_rho_and_o1(self, tmp_path):
        out = run_sample(tmp_path, n=30, samples=10)
        assert main(["estimate", "rho", "--in", str(out),
                     "--rbins", "6", "--rmax", "1.2"]) == 0
        rows = read_csv(out / "rho.csv")
        assert len(rows) == 6
        assert main(["estimate", "o1", "--in", str(out),
                     "--rbins", "6", "--rmax", "1.2"]) == 0
        assert len(read_csv(out / "o1.csv")) == 6

    def test_o2_windows(self, tmp_path):
        out = run_sample(tmp_path, n=30, samples=10)
        rc = main(["estimate", "o2", "--in", str(out), "--dmin", "auto",
                   "--pair", "0.3,0.0,-0.3,0.1", "--half-width", "0.3"])
        assert rc == 0
        rows = read_csv(out / "o2.csv")
        assert len(rows) == 1
        assert float(rows[0]["re_z"]) == 0.3

    def test_o2_requires_pairs(self, tmp_path):
        out = run_sample(tmp_path, n=10, samples=3)
        with pytest.raises(SystemExit):
            main(["estimate", "o2", "--in", str(out)])

    def test_hprod_and_tracecov(self, tmp_path):
        out = run_sample(tmp_path, n=30, samples=10)
        assert main(["estimate", "hprod", "--in", str(out),
                     "--z1", "2,0", "--z2", "2,0"]) == 0
        row = read_csv(out / "hprod.csv")[0]
        assert float(row["estimate_re"]) == pytest.approx(1 / 3, abs=0.1)
        assert main(["estimate", "tracecov", "--in", str(out),
                     "--word1", "X", "--word2", "X+"]) == 0
        assert read_csv(out / "tracecov.csv")[0]["word1"] == "X"

    def test_missing_run_dir_exit_code(self, tmp_path):
        assert main(["estimate", "rho", "--in", str(tmp_path / "nope")]) == 1


class TestAnalyticQsolve:
    def test_analytic_outputs(self, capsys):
        assert main(["analytic", "o2", "--model", "ginibre",
                     "--z1", "0.3,0.0", "--z2=-0.2,0.1"]) == 0
        line = capsys.readouterr().out.strip()
        label, re, im = line.split(",")
        assert label == "o2"
        assert float(re) < 0

    def test_exact_o2_raw(self, capsys):
        assert main(["analytic", "exact-o2", "--n", "2", "--raw"]) == 0
        _, re, _ = capsys.readouterr().out.strip().split(",")
        assert float(re) == pytest.approx(-6.0 / np.pi ** 2, rel=1e-10)

    def test_qsolve_green(self, capsys):
        assert main(["qsolve", "green", "--model", "elliptic",
                     "--sigma", "1", "--tau", "0.5", "--z", "4,0"]) == 0
        out = capsys.readouterr().out.splitlines()
        assert out[0] == "branch,holomorphic"
        g11 = float(out[1].split(",")[1])
        assert g11 == pytest.approx(4.0 - np.sqrt(14.0), rel=1e-10)

    def test_qsolve_o2_matches_analytic(self, capsys):
        assert main(["qsolve", "o2", "--model", "ginibre",
                     "--z1", "0.3,0.1", "--z2=-0.2,0.4"]) == 0
        _, re, im = capsys.readouterr().out.strip().split(",")
        from overlap_lab import analytic
        ref = analytic.o2_biunitary_closed_form("ginibre", 0.3 + 0.1j,
                                                -0.2 + 0.4j)
        assert complex(float(re), float(im)) == pytest.approx(ref, rel=1e-4)


class TestCompare:
    def write_table(self, path, values, stderr=0.1):
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["x", "estimate_re", "estimate_im", "stderr", "count"])
            for i, v in enumerate(values):
                w.writerow([i, v, 0.0, stderr, 100])

    def test_within_tolerance_exit_zero(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        self.write_table(a, [1.0, 2.0, 3.0])
        self.write_table(b, [1.05, 2.05, 2.95])
        assert main(["compare", "--table", str(a), "--ref", str(b)]) == 0

    def test_failure_exit_two(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        self.write_table(a, [1.0, 2.0, 3.0])
        self.write_table(b, [1.0, 2.0, 10.0])
        assert main(["compare", "--table", str(a), "--ref", str(b)]) == 2

    def test_mismatched_rows(self, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        self.write_table(a, [1.0, 2.0])
        self.write_table(b, [1.0])
        with pytest.raises(SystemExit):
            main(["compare", "--table", str(a), "--ref", str(b)])
