import json

import numpy as np
import pytest

from siphase import Generator, SamplingScheme, SISSignal, max_reconstruction_error, random_signal, take_phaseless_samples
from siphase import io as sio
from siphase.cli import main

G4 = Generator.bspline(4)


def test_coeff_csv_unsorted_read_sorted_write(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("k,c\n3,0.5\n1,-0.25\n2,0\n")
    f = sio.read_coeffs(p, G4)
    assert f.k_low == 1 and f.coeffs.tolist() == [-0.25, 0.0, 0.5]
    out = tmp_path / "o.csv"
    sio.write_coeffs(out, f)
    assert out.read_text() == "k,c\n1,-0.25\n2,0.0\n3,0.5\n"


def test_coeff_csv_errors(tmp_path):
    p = tmp_path / "c.csv"
    p.write_text("k,value\n1,2\n")
    with pytest.raises(ValueError):
        sio.read_coeffs(p, G4)
    p.write_text("k,c\n1,2\n1,3\n")
    with pytest.raises(ValueError):
        sio.read_coeffs(p, G4)


def test_scheme_json_round_trip(tmp_path):
    sch = SamplingScheme.default(11)
    sio.write_scheme(tmp_path / "s.json", sch)
    d = json.loads((tmp_path / "s.json").read_text())
    assert set(d) == {"generator", "X", "gamma_idx", "gamma_star_idx", "L"}
    assert sio.read_scheme(tmp_path / "s.json").to_dict() == sch.to_dict()


def test_samples_csv_round_trip(tmp_path):
    sch = SamplingScheme.default(7)
    f = random_signal("two_sided", (0, 12), 4, 0)
    s = take_phaseless_samples(f, sch, (-1, 3), 1e-6, "relative", 3)
    sio.write_samples(tmp_path / "z.csv", s)
    header = (tmp_path / "z.csv").read_text().splitlines()[0]
    assert header == "y,z,kprime,role,idx"
    back = sio.read_samples(tmp_path / "z.csv", sch)
    np.testing.assert_array_equal(back.z, s.z)
    np.testing.assert_array_equal(back.y, s.y)
    for name in ("kprime", "role", "idx", "offset"):
        np.testing.assert_array_equal(getattr(back.locations, name), getattr(s.locations, name))
    assert back.block_range == (-1, 3)


def test_samples_csv_rejects_foreign_rows(tmp_path):
    sch = SamplingScheme.default(7)
    p = tmp_path / "z.csv"
    p.write_text("y,z,kprime,role,idx\n0.125,0.1,0,SIDE,0\n")
    with pytest.raises(ValueError):
        sio.read_samples(p, sch)
    p.write_text("y,z,kprime,role,idx\n9.125,0.1,0,FWD,0\n")
    with pytest.raises(ValueError):
        sio.read_samples(p, sch)


@pytest.fixture
def workdir(tmp_path):
    sch = SamplingScheme.default(7)
    sio.write_scheme(tmp_path / "scheme.json", sch)
    f = random_signal("two_sided", (5, 32), 4, 0)
    sio.write_coeffs(tmp_path / "c.csv", f)
    return tmp_path, f


def test_cli_pipeline(workdir, capsys):
    d, f = workdir
    assert main(["validate", "--scheme", str(d / "scheme.json")]) == 0
    assert json.loads(capsys.readouterr().out)["full_spark"] is True
    assert main(["sample", "--scheme", str(d / "scheme.json"), "--coeffs", str(d / "c.csv"),
                 "--eps", "0", "--seed", "42", "--out", str(d / "z.csv")]) == 0
    for m0 in (f"oracle:{d / 'c.csv'}", "auto", "0"):
        assert main(["reconstruct", "--scheme", str(d / "scheme.json"), "--samples", str(d / "z.csv"),
                     "--m0", m0, "--out", str(d / "rec.csv"), "--diag", str(d / "diag.json")]) == 0
        rec = sio.read_reconstruction(d / "rec.csv", G4)
        assert max_reconstruction_error(rec, f) <= 1e-8
    diag = json.loads((d / "diag.json").read_text())
    assert {"M0", "L", "blocks"} <= set(diag)
    assert (d / "rec.csv").read_text().startswith("k,c_epsilon\n")


def test_cli_sample_reproducible(workdir):
    d, _ = workdir
    args = ["sample", "--scheme", str(d / "scheme.json"), "--coeffs", str(d / "c.csv"),
            "--eps", "1e-7", "--seed", "42", "--out"]
    main(args + [str(d / "a.csv")])
    main(args + [str(d / "b.csv")])
    assert (d / "a.csv").read_text() == (d / "b.csv").read_text()


def test_cli_experiment_and_scaling(workdir):
    d, _ = workdir
    (d / "exp.json").write_text(json.dumps({"epsilons": [1e-10, 1e-9, 1e-8, 1e-7], "Ls": [7], "trials": 2,
                                            "support": [0, 10]}))
    assert main(["experiment", "--config", str(d / "exp.json"), "--out", str(d / "r.csv")]) == 0
    lines = (d / "r.csv").read_text().splitlines()
    assert lines[0] == "epsilon,L,trials,success_rate,mean_e,max_e,mean_e2" and len(lines) == 5
    assert main(["scaling", "--config", str(d / "exp.json"), "--out", str(d / "s.json")]) == 0
    assert "slope_e" in json.loads((d / "s.json").read_text())


def test_cli_exit_codes(tmp_path, capsys):
    assert main(["validate", "--scheme", str(tmp_path / "missing.json")]) == 3
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({**SamplingScheme.default(7).to_dict(), "L": 4}))
    assert main(["validate", "--scheme", str(bad)]) == 2
    dup = tmp_path / "dup.json"
    dup.write_text(json.dumps({**SamplingScheme.default(7).to_dict(), "X": [0.5] * 7}))
    assert main(["validate", "--scheme", str(dup)]) == 2
    broken = tmp_path / "broken.json"
    broken.write_text("{not json")
    assert main(["validate", "--scheme", str(broken)]) == 3
    capsys.readouterr()
