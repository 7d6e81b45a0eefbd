import json
import os

import pytest

from monocert.errors import CampaignError, InvalidParameter, ParseError, SchemaError
from monocert.pipeline import (
    HEADER,
    CampaignConfig,
    certify,
    read_certificate_file,
    report_summary,
    run_campaign,
    verify_file,
)
from monocert.solver import SolverConfig, solve_certificate
from monocert.system import VertexAssignment, build_reduced_system, enumerate_assignments


class Stop(Exception):
    pass


def run(tmp_path, name, V, **kwargs):
    out = tmp_path / name
    summary = run_campaign(CampaignConfig(V=V, output_path=out, **kwargs))
    return out, summary


def test_small_campaign_complete_and_ordered(tmp_path):
    out, summary = run(tmp_path, "v6.csv", 6, checkpoint_interval=7)
    assert summary.total == summary.certified == 120
    assert summary.undetermined == 0 and summary.complete
    lines = out.read_text().splitlines()
    assert lines[0] == HEADER
    expected = [str(a) for a in enumerate_assignments(6)]
    assert [l.split(",")[1] for l in lines[1:]] == expected
    assert (tmp_path / "v6.csv.undetermined").read_text() == ""
    state = json.loads((tmp_path / "v6.csv.ckpt").read_text())
    assert state["next_index"] == 120
    check = verify_file(out)
    assert (check.valid, check.invalid, check.missing, check.duplicates) == (120, 0, 0, 0)


def test_v2_campaign(tmp_path):
    out, summary = run(tmp_path, "v2.csv", 2)
    assert out.read_text() == HEADER + "\n2,1,1\n"
    assert summary.certified == 1
    text = report_summary(out)
    assert "total: 1 of 1" in text and "certified: 1 (1 valid, 0 invalid)" in text


def test_workers_do_not_change_output(tmp_path):
    a, _ = run(tmp_path, "w1.csv", 6, checkpoint_interval=10)
    b, _ = run(tmp_path, "w2.csv", 6, checkpoint_interval=10, workers=2)
    assert a.read_bytes() == b.read_bytes()


def test_resume_after_interrupt_is_byte_identical(tmp_path):
    ref, _ = run(tmp_path, "ref.csv", 7, checkpoint_interval=100)
    out = tmp_path / "cut.csv"
    cfg = CampaignConfig(V=7, output_path=out, checkpoint_interval=100)
    calls = []

    def interrupt(done, total):
        calls.append(done)
        if len(calls) == 3:
            raise Stop

    with pytest.raises(Stop):
        run_campaign(cfg, interrupt)
    # a crash may leave a partial block behind the checkpoint
    with open(out, "a") as f:
        f.write("7,1-1-1-1-1-1,1-1")
    summary = run_campaign(CampaignConfig(V=7, output_path=out, checkpoint_interval=100, resume=True))
    assert summary.total == 720 and summary.certified == 720
    assert out.read_bytes() == ref.read_bytes()


def test_resume_rejects_changed_configuration(tmp_path):
    out, _ = run(tmp_path, "a.csv", 5, limit=10)
    with pytest.raises(InvalidParameter):
        run_campaign(CampaignConfig(V=5, output_path=out, checkpoint_interval=3, resume=True))


def test_limit_then_extend(tmp_path):
    ref, _ = run(tmp_path, "ref.csv", 6, checkpoint_interval=8)
    out, s1 = run(tmp_path, "part.csv", 6, checkpoint_interval=8, limit=40)
    assert s1.total == 40 and not s1.complete
    s2 = run_campaign(CampaignConfig(V=6, output_path=out, checkpoint_interval=8, resume=True))
    assert s2.total == 120 and s2.certified == 120
    assert out.read_bytes() == ref.read_bytes()


def test_resume_without_checkpoint_starts_fresh(tmp_path):
    out, summary = run(tmp_path, "fresh.csv", 4, resume=True)
    assert summary.certified == 6


def test_high_threshold_gives_undetermined(tmp_path):
    out, summary = run(tmp_path, "hi.csv", 5, solver=SolverConfig(z_threshold=0.3))
    assert summary.undetermined > 0
    assert summary.certified + summary.undetermined == 24
    und = (tmp_path / "hi.csv.undetermined").read_text().split()
    assert len(und) == summary.undetermined
    assert verify_file(out).missing == summary.undetermined
    text = report_summary(out)
    assert f"undetermined: {summary.undetermined}" in text
    assert und[0] in text


def test_unwritable_output_fails_before_solving(tmp_path):
    with pytest.raises(OSError):
        run_campaign(CampaignConfig(V=10, output_path=tmp_path / "missing" / "x.csv"))


def test_config_validation():
    for kwargs in ({"V": 1}, {"V": 13}, {"V": 5, "workers": 0}, {"V": 5, "checkpoint_interval": 0}, {"V": 5, "limit": 0}):
        with pytest.raises(InvalidParameter):
            CampaignConfig(output_path="x", **kwargs)


def test_certify_golden_system():
    a = VertexAssignment.parse("1,2,3,4,5,6,7,8,9")
    cert, resolves = certify(solve_certificate(build_reduced_system(a)))
    assert resolves == 0
    assert str(cert) == "5-24-42-49-47-40-31-21-10"


def write(tmp_path, body, header=HEADER):
    p = tmp_path / "f.csv"
    p.write_text(header + "\n" + body)
    return p


def test_verify_single_golden_row(tmp_path):
    p = write(tmp_path, "10,1-2-3-4-5-6-7-8-9,1-4-7-8-8-7-5-4-2\n")
    check = verify_file(p)
    assert (check.valid, check.invalid, check.missing) == (1, 0, 362879)
    assert check.ok


def test_verify_zero_coefficient_invalid(tmp_path):
    p = write(tmp_path, "10,1-2-3-4-5-6-7-8-9,1-0-7-8-8-7-5-4-2\n")
    check = verify_file(p)
    assert check.invalid == 1 and not check.ok
    assert check.invalid_rows[0][0] == 2
    assert "c_3" in check.invalid_rows[0][2]


def test_verify_indefinite_row_invalid(tmp_path):
    p = write(tmp_path, "10,1-2-3-4-5-6-7-8-9,1-4-7-8-8-7-5-4-1000\n")
    assert verify_file(p).invalid == 1


def test_verify_counts_duplicates(tmp_path):
    row = "3,1-1,1-1\n"
    check = verify_file(write(tmp_path, row + row))
    assert check.duplicates == 1 and check.valid == 2 and check.missing == 1


def test_assignment_out_of_range_counts_invalid(tmp_path):
    check = verify_file(write(tmp_path, "3,1-3,1-1\n"))
    assert check.invalid == 1 and check.valid == 0


@pytest.mark.parametrize(
    "body,line",
    [
        ("3,1-1\n", 2),
        ("3,1-1,1-1\n3,1-x,1-1\n", 3),
        ("3,1-1,1-1-1\n", 2),
        ("3,1-1,-1-1\n", 2),
        ("x,1-1,1-1\n", 2),
    ],
)
def test_parse_errors_carry_line_numbers(tmp_path, body, line):
    with pytest.raises(ParseError) as info:
        verify_file(write(tmp_path, body))
    assert info.value.line == line
    assert str(info.value).startswith(f"line {line}:")


def test_bad_header(tmp_path):
    with pytest.raises(ParseError) as info:
        verify_file(write(tmp_path, "", header="V,a,b"))
    assert info.value.line == 1


def test_mixed_vertex_counts(tmp_path):
    with pytest.raises(SchemaError):
        verify_file(write(tmp_path, "3,1-1,1-1\n4,1-1-1,1-1-1\n"))
    with pytest.raises(SchemaError):
        verify_file(write(tmp_path, "3,1-1,1-1\n"), V=4)


def test_read_rows(tmp_path):
    rows = list(read_certificate_file(write(tmp_path, "3,1-1,1-1\n\n3,1-2,2-3\n")))
    assert [r.line for r in rows] == [2, 4]
    assert rows[1].certificate.c == (2, 3)


def test_report_summary_contents(tmp_path):
    out, _ = run(tmp_path, "s.csv", 5)
    text = report_summary(out)
    assert "V = 5" in text
    assert "total: 24 of 24" in text
    assert "certified: 24 (24 valid, 0 invalid)" in text
    assert "largest pivot denominator" in text


def test_failed_certification_surfaces(tmp_path, monkeypatch):
    import monocert.pipeline as pl

    def boom(cand, cfg=SolverConfig()):
        raise CampaignError(f"assignment {cand.assignment}: no rounding verified")

    monkeypatch.setattr(pl, "certify", boom)
    with pytest.raises(CampaignError):
        run_campaign(CampaignConfig(V=4, output_path=tmp_path / "f.csv"))
    assert os.path.exists(tmp_path / "f.csv.ckpt")
