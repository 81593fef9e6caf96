import json
from pathlib import Path

import pytest

from semtransport.cli import main
from semtransport.screen_repr import load_corpus

GOLDEN = Path(__file__).parent / "golden"


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_run_writes_csv(tmp_path, capsys):
    code, out, _ = run(capsys, "run", "table1", "--out", str(tmp_path))
    assert code == 0
    assert (tmp_path / "table1.csv").exists()
    assert out.strip() == str(tmp_path / "table1.csv")


def test_run_override_and_config_error(tmp_path, capsys):
    code, _, err = run(capsys, "run", "fig_latency", "--out", str(tmp_path), "--set", "methods=[]")
    assert code == 2
    assert "methods" in err


def test_sweep_stdout(capsys):
    code, out, _ = run(capsys, "sweep", "--methods", "raw_compress", "--bandwidth", "1,5")
    assert code == 0
    assert out.splitlines() == [
        "scenario,series,x,x_unit,y,y_unit,source",
        "sweep,vision/raw_compress,1,Mbps,5600,ms,computed",
        "sweep,vision/raw_compress,5,Mbps,1120,ms,computed",
    ]


def test_corpus_gen(tmp_path, capsys):
    path = tmp_path / "c.json"
    code, _, _ = run(capsys, "corpus", "gen", "--count", "4", "--seed", "3", "--source", "ocr", "--out", str(path))
    assert code == 0
    snaps = load_corpus(path)
    assert len(snaps) == 4 and all(s.source.value == "ocr" for s in snaps)


@pytest.mark.parametrize("name", ["audio_150_tokens", "tts_3_tokens", "text_example_line", "empty_audio"])
def test_frame_decode_then_encode_golden(name, capsys):
    hexline = [ln for ln in (GOLDEN / f"{name}.hex").read_text().splitlines() if not ln.startswith("#")][0]
    code, out, _ = run(capsys, "frame", "decode", "--file", str(GOLDEN / f"{name}.hex"))
    assert code == 0
    info = json.loads(out)
    args = ["frame", "encode", "--modality", info["modality"], "--codebook", str(info["codebook_id"]),
            "--sequence", str(info["sequence"]), "--timestamp", str(info["timestamp_us"])]
    if "text" in info:
        args += ["--text", info["text"]]
    else:
        args += ["--tokens", ",".join(map(str, info["tokens"]))]
    code, out, _ = run(capsys, *args)
    assert code == 0
    assert out.strip() == hexline.strip()


def test_frame_errors(capsys):
    assert run(capsys, "frame", "decode", "00")[0] == 2
    assert run(capsys, "frame", "encode", "--modality", "audio_tokens", "--codebook", "1", "--tokens", "5000")[0] == 2
    assert run(capsys, "frame", "encode", "--modality", "smell")[0] == 2


def test_check_exit_codes(capsys):
    code, out, _ = run(capsys, "check", "--only", "1,3")
    assert code == 0
    assert len(out.splitlines()) == 2
    code, out, _ = run(capsys, "check", "--only", "3", "--set", "latency_ms.audio_turn_encode=[90, 360]")
    assert code == 1 and "crossover" in out
    code, out, _ = run(capsys, "check", "--only", "4", "--beta", "0")
    assert code == 1 and "criterion 4" in out
    code, _, _ = run(capsys, "check", "--profile", "missing_profile")
    assert code == 2
