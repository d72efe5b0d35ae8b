import json

import numpy as np
import pytest

from dispersia import ExpPolyKernel, GAUSSIAN, debye, drude, fit_decay, lorentz
from dispersia import io as dio
from dispersia.cli import main


def kernel_doc(kernel):
    return dio.kernel_to_doc(kernel)


ZERO_DOC = {"type": "exp_poly", "terms": []}


def write_config(tmp_path, doc, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(doc))
    return str(path)


def debye_sim_config(**overrides):
    doc = {
        "medium": {"eps": 1.0, "mu": 1.0,
                   "nu_e": kernel_doc(debye()), "nu_h": ZERO_DOC},
        "modes": [[1.0, 1.0]],
        "dt": 0.02,
        "T": 10.0,
        "output_stride": 5,
    }
    doc.update(overrides)
    return doc


class TestKernelDocs:
    def test_round_trip(self):
        ts = np.linspace(0, 6, 60)
        for kern in (debye(), lorentz(0.7, 1.3, 0.9), drude(2.0, 0.5)):
            back = dio.kernel_from_doc(dio.kernel_to_doc(kern))
            assert np.allclose(kern(ts), back(ts), atol=1e-12)

    def test_sampled_round_trip(self):
        back = dio.kernel_from_doc(dio.kernel_to_doc(GAUSSIAN))
        assert back.C == GAUSSIAN.C and back.delta == GAUSSIAN.delta

    def test_unknown_type(self):
        with pytest.raises(dio.ParseError, match="type"):
            dio.kernel_from_doc({"type": "mystery"})

    def test_missing_term_field(self):
        doc = {"type": "exp_poly",
               "terms": [{"poly_re": [1.0], "poly_im": [0.0], "z_re": -1.0}]}
        with pytest.raises(dio.ParseError, match="z_im"):
            dio.kernel_from_doc(doc)

    def test_unknown_builtin(self):
        with pytest.raises(dio.ParseError, match="name"):
            dio.kernel_from_doc({"type": "sampled_builtin", "name": "nope",
                                 "C": 1.0, "delta": 1.0})

    def test_kernel_file_reference(self, tmp_path):
        kpath = tmp_path / "kernel.json"
        kpath.write_text(json.dumps(kernel_doc(debye())))
        doc = {"eps": 1.0, "mu": 1.0, "nu_e": {"file": "kernel.json"},
               "nu_h": ZERO_DOC}
        medium = dio.parse_medium(doc, tmp_path)
        assert medium.nu_e(0.0) == pytest.approx(1.0)


class TestTraceFormat:
    def test_round_trip_bit_exact(self, tmp_path):
        from dispersia import MediumSpec, run_multimode
        medium = MediumSpec(1.0, 1.0, debye(), ExpPolyKernel.zero())
        trace = run_multimode(medium, [(1.0, 1.0)], dt=0.05, T=5.0)
        path = tmp_path / "trace.csv"
        dio.write_trace(path, trace)
        back = dio.read_trace(path)
        assert np.array_equal(back.times, trace.times)
        assert np.array_equal(back.energy, trace.energy)

    def test_header_enforced(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("time,e\n0,1\n")
        with pytest.raises(dio.ParseError, match="header"):
            dio.read_trace(path)


class TestAnalyzeCommand:
    def test_debye_report(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"nu_e": kernel_doc(debye())})
        assert main(["analyze", "--config", cfg]) == 0
        doc = json.loads(capsys.readouterr().out)
        assert doc["passive"] is True
        assert doc["strictly_passive"] is True
        assert doc["m"] == 0
        assert list(doc)[:3] == ["passive", "strictly_passive", "m"]

    def test_lorentz_m2(self, tmp_path, capsys):
        cfg = write_config(tmp_path, {"nu_e": kernel_doc(lorentz())})
        assert main(["analyze", "--config", cfg]) == 0
        assert json.loads(capsys.readouterr().out)["m"] == 2

    def test_negative_debye_exit3_with_witness(self, tmp_path, capsys):
        neg = {"type": "exp_poly",
               "terms": [{"poly_re": [-1.0], "poly_im": [0.0],
                          "z_re": -1.0, "z_im": 0.0}]}
        cfg = write_config(tmp_path, {"nu_e": neg})
        assert main(["analyze", "--config", cfg]) == 3
        doc = json.loads(capsys.readouterr().out)
        assert doc["passive"] is False
        assert doc["witnesses"]

    def test_undamped_kernel_exit2(self, tmp_path):
        bad = {"type": "exp_poly",
               "terms": [{"poly_re": [1.0], "poly_im": [0.0],
                          "z_re": 0.1, "z_im": 0.0}]}
        cfg = write_config(tmp_path, {"nu_e": bad})
        assert main(["analyze", "--config", cfg]) == 2

    def test_invalid_json_exit1(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json")
        assert main(["analyze", "--config", str(path)]) == 1


class TestSimulateCommand:
    def test_writes_trace(self, tmp_path):
        cfg = write_config(tmp_path, debye_sim_config())
        out = tmp_path / "trace.csv"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
        trace = dio.read_trace(out)
        assert trace.energy[0] == pytest.approx(0.5)

    def test_zero_amplitude(self, tmp_path):
        cfg = write_config(tmp_path, debye_sim_config(modes=[[1.0, 0.0]]))
        out = tmp_path / "trace.csv"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
        assert np.all(dio.read_trace(out).energy == 0.0)

    def test_sampled_kernel_exit4(self, tmp_path):
        doc = debye_sim_config()
        doc["medium"]["nu_e"] = kernel_doc(GAUSSIAN)
        cfg = write_config(tmp_path, doc)
        out = tmp_path / "trace.csv"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 4
        assert not out.exists()

    def test_invalid_field_named_no_partial_output(self, tmp_path, capsys):
        cfg = write_config(tmp_path, debye_sim_config(dt=-1.0))
        out = tmp_path / "trace.csv"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 1
        assert "dt" in capsys.readouterr().err
        assert not out.exists()

    def test_missing_modes_diagnostic(self, tmp_path, capsys):
        doc = debye_sim_config()
        del doc["modes"]
        cfg = write_config(tmp_path, doc)
        assert main(["simulate", "--config", cfg]) == 1
        assert "modes" in capsys.readouterr().err

    def test_cavity_shorthand(self, tmp_path):
        doc = debye_sim_config()
        del doc["modes"]
        doc["cavity"] = {"length": 1.0, "n_max": 3}
        cfg = write_config(tmp_path, doc)
        out = tmp_path / "trace.csv"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0

    def test_byte_identical_repeats_and_threads(self, tmp_path):
        doc = debye_sim_config(modes=[[float(k), 1.0 / k] for k in range(1, 9)])
        cfg = write_config(tmp_path, doc)
        blobs = []
        for i, threads in enumerate(("1", "1", "4")):
            out = tmp_path / f"trace{i}.csv"
            assert main(["simulate", "--config", cfg, "--out", str(out),
                         "--threads", threads]) == 0
            blobs.append(out.read_bytes())
        assert blobs[0] == blobs[1] == blobs[2]


class TestSpectrumCommand:
    def test_table(self, tmp_path, capsys):
        doc = {"medium": debye_sim_config()["medium"], "k_values": [1.0, 2.0]}
        cfg = write_config(tmp_path, doc)
        assert main(["spectrum", "--config", cfg]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert lines[0] == "k,abscissa,n_eigs"
        assert len(lines) == 3
        assert float(lines[1].split(",")[1]) < 0

    def test_lossless_abscissa_zero(self, tmp_path, capsys):
        doc = {"medium": {"eps": 1.0, "mu": 1.0, "nu_e": ZERO_DOC,
                          "nu_h": ZERO_DOC},
               "k_values": [1.0]}
        cfg = write_config(tmp_path, doc)
        assert main(["spectrum", "--config", cfg]) == 0
        lines = capsys.readouterr().out.strip().splitlines()
        assert abs(float(lines[1].split(",")[1])) <= 1e-12

    def test_k_range(self, tmp_path, capsys):
        doc = {"medium": debye_sim_config()["medium"],
               "k_range": {"k_min": 1.0, "k_max": 5.0, "num": 5}}
        cfg = write_config(tmp_path, doc)
        assert main(["spectrum", "--config", cfg]) == 0
        assert len(capsys.readouterr().out.strip().splitlines()) == 6


class TestFitCommand:
    def _trace_file(self, tmp_path):
        cfg = write_config(tmp_path, debye_sim_config(T=50.0))
        out = tmp_path / "trace.csv"
        assert main(["simulate", "--config", cfg, "--out", str(out)]) == 0
        return out

    def test_round_trip_matches_in_process(self, tmp_path, capsys):
        out = self._trace_file(tmp_path)
        assert main(["fit", str(out), "--window", "10,50"]) == 0
        doc = json.loads(capsys.readouterr().out)
        direct = fit_decay(dio.read_trace(out), (10.0, 50.0))
        assert doc["kind"] == direct.kind == "exponential"
        assert doc["rate"] == direct.rate

    def test_inconclusive_exit5(self, tmp_path):
        path = tmp_path / "flat.csv"
        rows = [dio.TRACE_HEADER] + [f"{t * 0.1:.17g},1,0" for t in range(100)]
        path.write_text("\n".join(rows) + "\n")
        assert main(["fit", str(path), "--window", "0,10"]) == 5

    def test_bad_window_exit1(self, tmp_path):
        out = self._trace_file(tmp_path)
        assert main(["fit", str(out), "--window", "oops"]) == 1

    def test_empty_window_exit1(self, tmp_path):
        out = self._trace_file(tmp_path)
        assert main(["fit", str(out), "--window", "200,300"]) == 1
