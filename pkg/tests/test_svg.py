import xml.etree.ElementTree as ET

import pytest

from contactgt.harness import ResultRow
from contactgt.svg import emit_plot, render_svg

NS = "{http://www.w3.org/2000/svg}"


def rows():
    out = []
    for dec, base in (("bpip", 0.5), ("bpcg", 0.7)):
        for m in (100, 200):
            for tau, bump in ((-1.0, 0.0), (0.0, 0.1)):
                s = base + bump + m / 2000
                out.append(ResultRow(dec, m, 0.01, tau, s, 0.2 - bump, 0.1 + bump, 50, 0))
    return out


def series(svg):
    root = ET.fromstring(svg)
    return root, {g.get("data-label"): g for g in root.iter(f"{NS}g") if g.get("class") == "series"}


def test_success_chart_structure():
    root, groups = series(render_svg(rows(), "success_vs_m"))
    assert root.get("data-kind") == "success_vs_m"
    assert root.get("data-y-range") == "0 1"
    assert set(groups) == {"bpip", "bpcg"}
    for g in groups.values():
        assert len(g.findall(f"{NS}circle")) == 2
        assert len(g.findall(f"{NS}polyline")) == 1


def test_roc_chart_has_one_curve_per_setting():
    root, groups = series(render_svg(rows(), "fnr_vs_fpr"))
    assert root.get("data-x-range") == "0 1"
    assert set(groups) == {"bpip M=100", "bpip M=200", "bpcg M=100", "bpcg M=200"}


def test_nan_points_skipped():
    r = rows()
    r[0] = ResultRow("bpip", 100, 0.01, -1.0, 0.5, float("nan"), 0.1, 50, 0)
    _, groups = series(render_svg(r, "fnr_vs_fpr"))
    assert len(groups["bpip M=100"].findall(f"{NS}circle")) == 1


def test_errors():
    with pytest.raises(ValueError):
        render_svg([], "success_vs_m")
    with pytest.raises(ValueError):
        render_svg(rows(), "pie")


def test_emit(tmp_path):
    path = tmp_path / "c.svg"
    emit_plot(rows(), "success_vs_m", path)
    assert path.read_text().startswith("<svg")
