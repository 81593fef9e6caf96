"""Command-line entry point.

Exit codes: 0 success, 1 acceptance failure, 2 configuration or input error.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from .corpus import generate_corpus
from .cost_models import load_profile, profile_from_dict, profile_to_dict
from .errors import ConfigError
from .experiments.acceptance import check_acceptance
from .experiments.runner import run_scenario, scenario_rows, write_rows
from .experiments.scenario import apply_overrides, scenario_from_dict, shipped_scenarios
from .frame_codec import FrameError, Modality, decode_frame, default_registry, encode_frame
from .screen_repr import Source, save_corpus

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _csv_list(text: str, cast=str) -> list:
    try:
        return [cast(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise ConfigError("", f"bad list {text!r}: {exc}") from None


def cmd_run(args) -> int:
    names = args.scenarios or shipped_scenarios()
    for name in names:
        path = run_scenario(name, out_dir=args.out, overrides=args.set, workers=args.workers)
        print(path)
    return EXIT_OK


def cmd_sweep(args) -> int:
    doc = {
        "schema": 1,
        "name": args.name,
        "kind": "breakdown" if args.breakdown else "latency",
        "profile": args.profile,
        "methods": _csv_list(args.methods),
        "media": _csv_list(args.media),
        "sources": _csv_list(args.sources),
        "baseline_encode": args.baseline_encode,
        "link": {
            "bandwidth_mbps": _csv_list(args.bandwidth, float),
            "rtt_ms": args.rtt,
            "include_propagation": args.propagation,
        },
    }
    sc = scenario_from_dict(apply_overrides(doc, args.set), Path.cwd())
    if args.out:
        print(run_scenario(sc, out_dir=args.out, workers=args.workers))
    else:
        write_rows(scenario_rows(sc, args.workers), sys.stdout)
    return EXIT_OK


def cmd_corpus_gen(args) -> int:
    if args.count < 1:
        raise ConfigError("count", "must be at least 1")
    snaps = generate_corpus(args.count, args.seed, width=args.width, height=args.height, source=args.source)
    save_corpus(snaps, args.out, seed=args.seed, source=args.source)
    print(f"wrote {len(snaps)} snapshots to {args.out}")
    return EXIT_OK


def cmd_check(args) -> int:
    profile = load_profile(args.profile)
    if args.set:
        profile = profile_from_dict(apply_overrides(profile_to_dict(profile), args.set))
    only = _csv_list(args.only, int) if args.only else None
    report = check_acceptance(profile, beta=args.beta, only=only)
    print("\n".join(report.detail_lines() if args.verbose else report.lines()))
    return EXIT_OK if report.passed else EXIT_FAIL


def cmd_frame_encode(args) -> int:
    try:
        modality = Modality[args.modality.upper()]
    except KeyError:
        raise ConfigError("modality", f"unknown modality {args.modality!r}") from None
    reg = default_registry()
    if modality.is_text:
        frame = encode_frame(modality, args.codebook, text=(args.text or "").encode("utf-8"), registry=reg,
                             sequence=args.sequence, timestamp_us=args.timestamp)
    else:
        tokens = _csv_list(args.tokens or "", int)
        frame = encode_frame(modality, args.codebook, tokens=tokens, registry=reg,
                             sequence=args.sequence, timestamp_us=args.timestamp)
    print(frame.to_bytes().hex())
    return EXIT_OK


def cmd_frame_decode(args) -> int:
    text = Path(args.file).read_text() if args.file else args.hex
    if text is None:
        raise ConfigError("hex", "give a hex string or --file")
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    try:
        data = bytes.fromhex("".join(lines))
    except ValueError as exc:
        raise ConfigError("hex", str(exc)) from None
    header, body = decode_frame(data, default_registry())
    out = {
        "version": header.version,
        "modality": header.modality.name.lower(),
        "codebook_id": header.codebook_id,
        "count": header.count,
        "sequence": header.sequence,
        "timestamp_us": header.timestamp_us,
    }
    if isinstance(body, bytes):
        out["text"] = body.decode("utf-8", errors="replace")
    else:
        out["tokens"] = body
    print(json.dumps(out))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="semtransport", description="Token transport latency and byte models.")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run shipped or custom scenarios and write CSVs")
    run.add_argument("scenarios", nargs="*", help="scenario names or YAML paths (default: all shipped)")
    run.add_argument("--out", help="output directory (overrides $SEMTRANSPORT_OUTPUT_DIR)")
    run.add_argument("--set", action="append", default=[], metavar="PATH=VALUE", help="override a scenario field")
    run.add_argument("--workers", type=int, default=None)
    run.set_defaults(func=cmd_run)

    sw = sub.add_parser("sweep", help="latency vs bandwidth for a method grid")
    sw.add_argument("--name", default="sweep")
    sw.add_argument("--methods", default="raw,raw_compress,token_static,token_hybrid")
    sw.add_argument("--media", default="vision")
    sw.add_argument("--sources", default="accessibility_tree")
    sw.add_argument("--bandwidth", default="1,2,5,10,20,50,100", help="comma-separated Mbps")
    sw.add_argument("--rtt", type=float, default=50.0)
    sw.add_argument("--propagation", action="store_true", help="add RTT/2 to every transfer")
    sw.add_argument("--baseline-encode", action="store_true", help="charge WebP/Opus encode time")
    sw.add_argument("--breakdown", action="store_true", help="emit per-stage rows")
    sw.add_argument("--profile", default="paper_defaults")
    sw.add_argument("--set", action="append", default=[], metavar="PATH=VALUE")
    sw.add_argument("--out", help="output directory; CSV goes to stdout when omitted")
    sw.add_argument("--workers", type=int, default=None)
    sw.set_defaults(func=cmd_sweep)

    corpus = sub.add_parser("corpus", help="synthetic screen corpora")
    csub = corpus.add_subparsers(dest="corpus_command", required=True)
    gen = csub.add_parser("gen", help="generate a corpus file")
    gen.add_argument("--count", type=int, default=200)
    gen.add_argument("--seed", type=int, default=1)
    gen.add_argument("--width", type=int, default=1920)
    gen.add_argument("--height", type=int, default=1080)
    gen.add_argument("--source", choices=[s.value for s in Source], default=Source.ACCESSIBILITY_TREE.value)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_corpus_gen)

    chk = sub.add_parser("check", help="run the acceptance self-checks")
    chk.add_argument("--profile", default="paper_defaults")
    chk.add_argument("--set", action="append", default=[], metavar="PATH=VALUE", help="override a profile field")
    chk.add_argument("--beta", type=float, default=0.2, help="playout cushion as a fraction of batch length")
    chk.add_argument("--only", help="comma-separated criterion numbers")
    chk.add_argument("-v", "--verbose", action="store_true", help="print every check")
    chk.set_defaults(func=cmd_check)

    frame = sub.add_parser("frame", help="encode or decode a single token frame")
    fsub = frame.add_subparsers(dest="frame_command", required=True)
    enc = fsub.add_parser("encode")
    enc.add_argument("--modality", required=True, help=", ".join(m.name.lower() for m in Modality))
    enc.add_argument("--codebook", type=int, default=0)
    enc.add_argument("--tokens", help="comma-separated token indices")
    enc.add_argument("--text", help="payload for text modalities")
    enc.add_argument("--sequence", type=int, default=0)
    enc.add_argument("--timestamp", type=int, default=0, help="microseconds")
    enc.set_defaults(func=cmd_frame_encode)
    dec = fsub.add_parser("decode")
    dec.add_argument("hex", nargs="?")
    dec.add_argument("--file", help="hex file; lines starting with # are ignored")
    dec.set_defaults(func=cmd_frame_decode)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FrameError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
