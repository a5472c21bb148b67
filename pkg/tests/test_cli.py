import json

import pytest

from sparsalloc._csvio import read_csv
from sparsalloc.allocator import allocate_uniform, load_profile, save_profile
from sparsalloc.cli import build_parser, config_from_args, main
from sparsalloc.netmodel import load_net


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


@pytest.fixture
def net_path(tmp_path, capsys):
    path = tmp_path / "net.spal"
    code, _, _ = run(
        ["gen-net", "--layers", "6", "--dim", "12", "--seed", "1", "-o", str(path)],
        capsys,
    )
    assert code == 0
    return path


class TestGenNet:
    def test_digest_stable_across_runs(self, tmp_path, capsys):
        p1, p2 = tmp_path / "a.spal", tmp_path / "b.spal"
        code1, out1, _ = run(
            ["gen-net", "--layers", "3", "--dim", "8", "--seed", "5", "-o", str(p1)],
            capsys,
        )
        code2, out2, _ = run(
            ["gen-net", "--layers", "3", "--dim", "8", "--seed", "5", "-o", str(p2)],
            capsys,
        )
        assert code1 == code2 == 0
        assert p1.read_bytes() == p2.read_bytes()
        digest1 = out1.split("sha256=")[1].strip()
        digest2 = out2.split("sha256=")[1].strip()
        assert digest1 == digest2

    def test_missing_seed_is_usage_error(self, tmp_path, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["gen-net", "--layers", "3", "--dim", "8", "-o", str(tmp_path / "x.spal")])
        assert exc.value.code == 2

    def test_dims_list_arity(self, tmp_path, capsys):
        path = tmp_path / "x.spal"
        code, _, _ = run(
            ["gen-net", "--layers", "2", "--dims", "3,4,5", "--seed", "1", "-o", str(path)],
            capsys,
        )
        assert code == 0
        net = load_net(path)
        assert net.dims == [3, 4, 5]

    def test_wrong_dims_arity_is_domain_error(self, tmp_path, capsys):
        code, _, err = run(
            ["gen-net", "--layers", "3", "--dims", "3,4,5", "--seed", "1", "-o", str(tmp_path / "x.spal")],
            capsys,
        )
        assert code == 3
        assert "error" in err


class TestSearch:
    def test_report_rows_for_32_layer_default(self, tmp_path, capsys):
        net = tmp_path / "net32.spal"
        code, _, _ = run(
            ["gen-net", "--layers", "32", "--dim", "8", "--seed", "2", "-o", str(net)],
            capsys,
        )
        assert code == 0
        csv_path = tmp_path / "report.csv"
        json_path = tmp_path / "report.json"
        profile_path = tmp_path / "profile.json"
        code, out, _ = run(
            [
                "search",
                "--net", str(net),
                "-S", "0.7",
                "--calib-seed", "3",
                "--samples", "16",
                "--out-csv", str(csv_path),
                "--out-json", str(json_path),
                "--out-profile", str(profile_path),
            ],
            capsys,
        )
        assert code == 0
        header, rows, meta = read_csv(csv_path)
        assert len(rows) == 10  # uniform fallback + 9 grid attempts
        doc = json.loads(json_path.read_text())
        assert len(doc["candidates"]) == 10
        profile = load_profile(profile_path)
        assert abs(sum(profile.rates) / 32 - 0.7) <= 1e-12

    def test_two_layer_boundary_completes(self, tmp_path, capsys):
        net = tmp_path / "net2.spal"
        run(["gen-net", "--layers", "2", "--dim", "4", "--seed", "4", "-o", str(net)], capsys)
        code, out, _ = run(
            ["search", "--net", str(net), "-S", "0.5", "--calib-seed", "5", "--samples", "8"],
            capsys,
        )
        assert code == 0
        assert "evaluated 501 candidates" in out

    def test_infeasible_sparsity_is_domain_error(self, net_path, capsys):
        code, _, err = run(
            ["search", "--net", str(net_path), "-S", "1.5", "--calib-seed", "5"],
            capsys,
        )
        assert code == 3

    def test_byte_identical_reports_across_runs(self, net_path, tmp_path, capsys):
        a, b = tmp_path / "a.csv", tmp_path / "b.csv"
        for path in (a, b):
            code, _, _ = run(
                [
                    "search",
                    "--net", str(net_path),
                    "-S", "0.6",
                    "--step", "0.01",
                    "--calib-seed", "7",
                    "--samples", "8",
                    "--out-csv", str(path),
                ],
                capsys,
            )
            assert code == 0
        assert a.read_bytes() == b.read_bytes()


class TestPrune:
    def test_zero_profile_preserves_net_bytes(self, net_path, tmp_path, capsys):
        profile_path = tmp_path / "zero.json"
        save_profile(allocate_uniform(0.0, 6), profile_path)
        out_net = tmp_path / "sparse.spal"
        code, out, _ = run(
            [
                "prune",
                "--net", str(net_path),
                "--profile", str(profile_path),
                "--calib-seed", "6",
                "--samples", "8",
                "--out-net", str(out_net),
            ],
            capsys,
        )
        assert code == 0
        assert out_net.read_bytes() == net_path.read_bytes()

    def test_achieved_sparsity_and_trace(self, net_path, tmp_path, capsys):
        profile_path = tmp_path / "half.json"
        save_profile(allocate_uniform(0.5, 6), profile_path)
        trace_path = tmp_path / "trace.csv"
        masks_path = tmp_path / "masks.spal"
        code, out, _ = run(
            [
                "prune",
                "--net", str(net_path),
                "--profile", str(profile_path),
                "--calib-seed", "6",
                "--samples", "8",
                "--out-trace", str(trace_path),
                "--out-masks", str(masks_path),
            ],
            capsys,
        )
        assert code == 0
        header, rows, _ = read_csv(trace_path)
        assert len(rows) == 6
        numel = 12 * 12
        for row in rows:
            assert abs(float(row[1]) - 0.5) <= 1.0 / numel
        from sparsalloc.pruner import load_masks

        masks = load_masks(masks_path)
        assert len(masks) == 6

    def test_profile_net_mismatch_is_domain_error(self, net_path, tmp_path, capsys):
        profile_path = tmp_path / "bad.json"
        save_profile(allocate_uniform(0.5, 4), profile_path)
        code, _, err = run(
            [
                "prune",
                "--net", str(net_path),
                "--profile", str(profile_path),
                "--calib-seed", "6",
            ],
            capsys,
        )
        assert code == 3

    def test_mixed_nm_mode(self, net_path, tmp_path, capsys):
        profile_path = tmp_path / "nm.json"
        save_profile(allocate_uniform(0.75, 6), profile_path)
        code, out, _ = run(
            [
                "prune",
                "--net", str(net_path),
                "--profile", str(profile_path),
                "--calib-seed", "6",
                "--samples", "8",
                "--nm-m", "4",
            ],
            capsys,
        )
        assert code == 0
        assert "keep counts: [1, 1, 1, 1, 1, 1]" in out


class TestValidate:
    def test_default_suite_passes(self, tmp_path, capsys):
        code, out, _ = run(
            [
                "validate",
                "--seed", "1",
                "--pairs", "50",
                "--t1-layers", "5",
                "--t2-nets", "3",
                "--dim", "16",
                "--samples", "16",
                "--layers", "5",
                "--out-dir", str(tmp_path / "val"),
            ],
            capsys,
        )
        assert code == 0
        assert out.count("PASS") == 4
        assert (tmp_path / "val" / "lemma1.csv").exists()
        assert (tmp_path / "val" / "theorem4.csv").exists()

    def test_theorem4_emits_720_rows(self, tmp_path, capsys):
        out_dir = tmp_path / "val"
        code, out, _ = run(
            ["validate", "--seed", "1", "--theorem", "4", "--layers", "6", "--out-dir", str(out_dir)],
            capsys,
        )
        assert code == 0
        _, rows, _ = read_csv(out_dir / "theorem4.csv")
        assert len(rows) == 720

    def test_theorem1_nested_fully_monotone(self, capsys):
        code, out, _ = run(
            ["validate", "--seed", "2", "--theorem", "1", "--nested", "--t1-layers", "5", "--dim", "16", "--samples", "16"],
            capsys,
        )
        assert code == 0
        assert "min monotone fraction 1.0" in out

    def test_missing_seed_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["validate"])
        assert exc.value.code == 2


class TestStepAblationCmd:
    def test_table_rows(self, net_path, tmp_path, capsys):
        csv_path = tmp_path / "steps.csv"
        code, out, _ = run(
            [
                "step-ablation",
                "--net", str(net_path),
                "-S", "0.7",
                "--steps", "0.008,0.004,0.002,0.001,0.0005",
                "--calib-seed", "8",
                "--samples", "8",
                "--out-csv", str(csv_path),
            ],
            capsys,
        )
        assert code == 0
        header, rows, _ = read_csv(csv_path)
        assert header == ["step", "best_beta", "best_objective", "evaluations"]
        assert len(rows) == 5


class TestRandomSearchCmd:
    def test_runs_and_writes(self, net_path, tmp_path, capsys):
        csv_path = tmp_path / "random.csv"
        profile_path = tmp_path / "random.json"
        code, out, _ = run(
            [
                "random-search",
                "--net", str(net_path),
                "-S", "0.7",
                "--iters", "20",
                "--seed", "9",
                "--calib-seed", "10",
                "--samples", "8",
                "--out-csv", str(csv_path),
                "--out-profile", str(profile_path),
            ],
            capsys,
        )
        assert code == 0
        header, rows, _ = read_csv(csv_path)
        assert header == ["iteration", "objective"]
        assert len(rows) == 20
        profile = load_profile(profile_path)
        assert abs(sum(profile.rates) / 6 - 0.7) <= 1e-9


class TestReport:
    def test_win_loss_counts(self, net_path, tmp_path, capsys):
        csvs = []
        for i in range(3):
            path = tmp_path / f"search{i}.csv"
            code, _, _ = run(
                [
                    "search",
                    "--net", str(net_path),
                    "-S", "0.7",
                    "--step", "0.01",
                    "--calib-seed", str(20 + i),
                    "--samples", "8",
                    "--out-csv", str(path),
                ],
                capsys,
            )
            assert code == 0
            csvs.append(str(path))
        rnd_csv = tmp_path / "rand.csv"
        code, _, _ = run(
            [
                "random-search",
                "--net", str(net_path),
                "-S", "0.7",
                "--iters", "5",
                "--seed", "30",
                "--calib-seed", "20",
                "--samples", "8",
                "--out-csv", str(rnd_csv),
            ],
            capsys,
        )
        assert code == 0
        csvs.append(str(rnd_csv))
        out_csv = tmp_path / "summary.csv"
        code, out, _ = run(
            ["report", "--inputs", *csvs, "--out-csv", str(out_csv)], capsys
        )
        assert code == 0
        assert "searched profile vs uniform: " in out
        header, rows, _ = read_csv(out_csv)
        assert len(rows) == 4
        kinds = {row[1] for row in rows}
        assert kinds == {"search", "random"}

    def test_unrecognized_csv_is_domain_error(self, tmp_path, capsys):
        bad = tmp_path / "bad.csv"
        bad.write_text("a,b\n1,2\n")
        code, _, _ = run(["report", "--inputs", str(bad)], capsys)
        assert code == 3


class TestConfig:
    def test_config_supplies_defaults_and_flags_override(self, tmp_path, capsys):
        cfg = {"layers": 3, "dim": 8, "seed": 5, "out": str(tmp_path / "cfg.spal")}
        cfg_path = tmp_path / "conf.json"
        cfg_path.write_text(json.dumps(cfg))
        code, _, _ = run(["gen-net", "--config", str(cfg_path)], capsys)
        assert code == 0
        assert (tmp_path / "cfg.spal").exists()
        override = tmp_path / "override.spal"
        code, _, _ = run(
            ["gen-net", "--config", str(cfg_path), "-o", str(override)], capsys
        )
        assert code == 0
        assert override.exists()

    def test_parse_render_roundtrip(self, tmp_path):
        parser, registry = build_parser()
        argv = [
            "gen-net", "--layers", "3", "--dim", "8", "--seed", "5",
            "-o", str(tmp_path / "n.spal"),
        ]
        args = parser.parse_args(argv)
        cfg = config_from_args(args)
        cfg_path = tmp_path / "c.json"
        cfg_path.write_text(json.dumps(cfg))
        parser2, registry2 = build_parser()
        registry2["gen-net"].set_defaults(**cfg)
        args2 = parser2.parse_args(["gen-net"])
        assert config_from_args(args2) == cfg

    def test_bad_config_path(self, capsys):
        code, _, err = run(["gen-net", "--config", "/nonexistent.json"], capsys)
        assert code == 3
