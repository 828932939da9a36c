"""CLI exit codes, output formats and flag plumbing."""

from __future__ import annotations

import json

import pytest

from speye.cli import main


@pytest.fixture()
def registry_file(fixture_server, tmp_path):
    path = tmp_path / "overlay.json"
    path.write_text(fixture_server.overlay_registry_json(), encoding="utf-8")
    return str(path)


class TestScanCommand:
    def test_scan_json_exit_zero(self, fixture_server, registry_file, capsys):
        code = main(
            [
                "scan",
                fixture_server.site_url("site11"),
                "--format",
                "json",
                "--registry",
                registry_file,
                "--deterministic",
            ]
        )
        assert code == 0
        payload = json.loads(capsys.readouterr().out)
        assert [r["idp"] for r in payload["idp_results"]] == ["facebook", "google", "apple"]
        assert payload["disclaimer"]

    def test_scan_all_misses_exit_two(self, fixture_server, registry_file, capsys):
        code = main(["scan", fixture_server.site_url("site7"), "--registry", registry_file])
        assert code == 2
        assert "Misses" in capsys.readouterr().out

    def test_scan_unreachable_exit_three(self, registry_file, capsys):
        code = main(["scan", "http://127.0.0.1:9/none", "--registry", registry_file])
        assert code == 3
        assert "error" in capsys.readouterr().err

    def test_json_output_is_canonical(self, fixture_server, registry_file, capsys):
        args = [
            "scan",
            fixture_server.site_url("site11"),
            "--format",
            "json",
            "--registry",
            registry_file,
            "--deterministic",
        ]
        assert main(args) == 0
        first = capsys.readouterr().out
        assert main(args) == 0
        second = capsys.readouterr().out
        assert first == second
        parsed = json.loads(first)
        assert json.dumps(parsed, sort_keys=True, indent=2, ensure_ascii=False) + "\n" == first

    def test_output_flag_writes_file(self, fixture_server, registry_file, tmp_path, capsys):
        out = tmp_path / "report.json"
        code = main(
            [
                "scan",
                fixture_server.site_url("site11"),
                "--format",
                "json",
                "--registry",
                registry_file,
                "--deterministic",
                "--output",
                str(out),
            ]
        )
        assert code == 0
        assert capsys.readouterr().out == ""
        assert json.loads(out.read_text(encoding="utf-8"))["idp_results"]

    def test_flag_plumbing_reaches_scan_config(self, fixture_server, registry_file):
        code = main(
            [
                "scan",
                fixture_server.site_url("site11"),
                "--registry",
                registry_file,
                "--max-redirects",
                "2",
                "--timeout-ms",
                "5000",
                "--parallel",
                "1",
                "--deterministic",
            ]
        )
        assert code == 0


class TestFocusedCommand:
    def test_focused_non_idp_exit_one(self, capsys):
        code = main(["focused", "https://rp.example/x"])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_focused_text_report(self, capsys):
        code = main(
            [
                "focused",
                "https://www.facebook.com/v9.0/dialog/oauth?client_id=1"
                "&redirect_uri=https%3A%2F%2Frp.example%2Fcb&response_type=code&scope=email",
            ]
        )
        assert code == 0
        out = capsys.readouterr().out
        assert "Facebook" in out and "rp.example" in out


class TestRegistryCommand:
    def test_text_summary(self, capsys):
        assert main(["registry"]) == 0
        out = capsys.readouterr().out
        assert "3 providers" in out and "9 endpoint patterns" in out

    def test_json_summary(self, capsys):
        assert main(["registry", "--format", "json"]) == 0
        payload = json.loads(capsys.readouterr().out)
        assert [p["idp"] for p in payload["providers"]] == ["facebook", "google", "apple"]

    def test_env_var_overrides_registry(self, registry_file, monkeypatch, capsys):
        monkeypatch.setenv("SPEYE_REGISTRY", registry_file)
        assert main(["registry"]) == 0
        assert "12 endpoint patterns" in capsys.readouterr().out

    def test_bad_registry_path_exit_one(self, capsys):
        assert main(["registry", "--registry", "/nonexistent/registry.json"]) == 1


class TestUsage:
    def test_no_command_is_usage_error(self, capsys):
        assert main([]) == 1

    def test_unknown_command_is_usage_error(self, capsys):
        assert main(["frobnicate"]) == 1

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0


class TestFixturesCommand:
    def test_fixtures_start_and_emit_registry(self, tmp_path, capsys):
        out = tmp_path / "overlay.json"
        code = main(
            ["fixtures", "--listen", "127.0.0.1:0", "--emit-registry", str(out), "--exit-after-start"]
        )
        assert code == 0
        printed = capsys.readouterr().out
        assert "Serving fixture corpus" in printed
        assert out.exists()
