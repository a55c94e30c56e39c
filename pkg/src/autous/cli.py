"""Command-line interface.

Machine-readable results go to stdout, human commentary to stderr.  Exit
codes: 0 success, 1 runtime failure (including a rejected dataset), 2
validation or usage errors.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

from .exceptions import AutoUSError, ValidationError

EXIT_OK = 0
EXIT_RUNTIME = 1
EXIT_VALIDATION = 2


def _say(message: str) -> None:
    print(message, file=sys.stderr)


def _parse_log_base(text: str) -> float:
    if text in ("e", "ln", "natural"):
        return math.e
    try:
        value = float(text)
    except ValueError:
        raise ValidationError(f"bad log base {text!r}") from None
    return value


def _parse_shape(text: str) -> tuple[int, ...]:
    try:
        dims = tuple(int(part) for part in text.lower().split("x"))
    except ValueError:
        raise ValidationError(f"bad shape {text!r}; expected e.g. 8x32x32x1") from None
    return dims


# ---------------------------------------------------------------------------
# dataset subcommands
# ---------------------------------------------------------------------------

def cmd_dataset_filter(args) -> int:
    from .video_data import evaluate_dataset_acceptance

    decision = evaluate_dataset_acceptance(
        args.acc, args.classes, theta=args.theta, log_base=args.log_base
    )
    verdict = "accepted" if decision.accepted else "rejected"
    print(f"{verdict} (threshold {decision.threshold:.4f})")
    _say(
        f"baseline accuracy {decision.accuracy:.4f} vs threshold "
        f"{decision.threshold:.4f} for {decision.num_classes} classes"
    )
    return EXIT_OK if decision.accepted else EXIT_RUNTIME


def cmd_dataset_merge(args) -> int:
    from .video_data import load_manifest, merge_categories, save_manifest

    manifest = load_manifest(args.manifest)
    mapping: dict[int, str] = {}
    for item in args.map:
        old, _, new = item.partition("=")
        if not new:
            raise ValidationError(f"bad --map entry {item!r}; expected OLD_ID=NewName")
        mapping[int(old)] = new
    merged = merge_categories(manifest, mapping)
    save_manifest(merged, args.out)
    print(f"manifest={args.out} entries={len(merged.entries)} "
          f"classes={len(merged.class_names)}")
    _say(f"classes: {', '.join(merged.class_names)}")
    return EXIT_OK


def cmd_dataset_split(args) -> int:
    from .video_data import load_manifest, save_manifest, split_train_test

    manifest = load_manifest(args.manifest)
    split = split_train_test(manifest, args.train_fraction, seed=args.seed)
    save_manifest(split, args.out)
    n_train = len(split.subset("train"))
    n_test = len(split.subset("test"))
    print(f"manifest={args.out} train={n_train} test={n_test}")
    _say(f"stratified split at {args.train_fraction} with seed {args.seed}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# model subcommands
# ---------------------------------------------------------------------------

def _model_config(args):
    from .ctu_net import ModelConfig

    if args.preset == "tiny":
        return ModelConfig.tiny(seed=args.model_seed)
    return ModelConfig(seed=args.model_seed)


def cmd_train(args) -> int:
    from .ctu_net.checkpoint import write_checkpoint
    from .train_eval import TrainSpec, train
    from .train_eval.reporting import write_loss_curve
    from .video_data import load_manifest

    manifest = load_manifest(args.manifest)
    spec = TrainSpec(
        batch_size=args.batch_size,
        learning_rate=args.lr,
        epochs=args.epochs,
        seed=args.seed,
    )
    result = train(_model_config(args), manifest, spec)
    write_checkpoint(result.checkpoint, args.out)
    if args.loss_curve:
        write_loss_curve(result.loss_curve, args.loss_curve)
    last = result.loss_curve[-1][1] if result.loss_curve else float("nan")
    print(f"checkpoint={args.out} steps={len(result.loss_curve)} "
          f"final_loss={last:.6f}")
    _say(f"trained {args.epochs} epochs (lr {args.lr}, batch {args.batch_size}, "
         f"seed {args.seed})")
    return EXIT_OK


def cmd_eval(args) -> int:
    from .ctu_net import load_model
    from .train_eval import evaluate
    from .train_eval.reporting import emit_report
    from .video_data import load_manifest

    manifest = load_manifest(args.manifest)
    model = load_model(args.checkpoint)
    report = evaluate(model, manifest, split=args.split)
    print(f"accuracy={report.accuracy:.4f} recall={report.macro_recall:.4f} "
          f"precision={report.macro_precision:.4f}")
    for class_id, name in enumerate(manifest.class_names):
        auc = report.per_class_auc.get(class_id)
        print(f"auc.{name}={'n/a' if auc is None else f'{auc:.4f}'}")
    if args.report_dir:
        paths = emit_report({args.variant: report}, args.report_dir,
                            manifest.class_names)
        _say(f"wrote {paths['metrics']} and {paths['radar']}")
    return EXIT_OK


def cmd_ablate(args) -> int:
    from .train_eval import TrainSpec, run_ablations
    from .train_eval.reporting import emit_ablation_report
    from .video_data import load_manifest

    manifest = load_manifest(args.manifest)
    spec = TrainSpec(
        batch_size=args.batch_size,
        learning_rate=args.lr,
        epochs=args.epochs,
        seed=args.seed,
    )
    table = run_ablations(manifest, _model_config(args), spec)
    paths = emit_ablation_report(table, args.out, manifest.class_names)
    for outcome in table.rows():
        if outcome.metrics is None:
            print(f"variant={outcome.variant} error={outcome.error!r}")
        else:
            m = outcome.metrics
            print(f"variant={outcome.variant} accuracy={m.accuracy:.4f} "
                  f"recall={m.macro_recall:.4f} precision={m.macro_precision:.4f}")
    _say(f"wrote {', '.join(sorted(paths.values()))}")
    failed = [o for o in table.rows() if o.metrics is None]
    return EXIT_RUNTIME if failed else EXIT_OK


def cmd_classify(args) -> int:
    import torch

    from .ctu_net import batch_from_samples, load_model
    from .video_data import ManifestEntry, load_video

    model = load_model(args.checkpoint)
    t, h, w, _c = model.config.input_shape
    entry = ManifestEntry(
        id=os.path.basename(args.video),
        media_path=args.video,
        class_id=0,
        source_dataset="cli",
        num_frames=1,
    )
    sample = load_video(entry, (h, w), t)
    frames, _ = batch_from_samples([sample])
    with torch.no_grad():
        pred = model(frames)
    probs = pred.probs[0].numpy()
    from .agent import opinion_from_probs

    opinion = opinion_from_probs(probs)
    print(f"{opinion.label_text} {opinion.confidence:.2f}")
    _say("probs: " + " ".join(f"{p:.4f}" for p in probs))
    return EXIT_OK


def cmd_diagnose(args) -> int:
    import torch

    from .agent import (
        ClinicalContext,
        LLMBackendSpec,
        backend_from_spec,
        build_prompt,
        generate_report,
        opinion_from_probs,
        render_report,
    )
    from .ctu_net import batch_from_samples, load_model
    from .video_data import ManifestEntry, load_video

    model = load_model(args.checkpoint)
    t, h, w, _c = model.config.input_shape
    entry = ManifestEntry(
        id=os.path.basename(args.video),
        media_path=args.video,
        class_id=0,
        source_dataset="cli",
        num_frames=1,
    )
    sample = load_video(entry, (h, w), t)
    frames, _ = batch_from_samples([sample])
    with torch.no_grad():
        pred = model(frames)
    opinion = opinion_from_probs(pred.probs[0].numpy())

    ctx = ClinicalContext(
        chief_complaint=args.chief_complaint,
        physical_exam=args.physical_exam,
        additional_info=args.additional_info,
    )
    if args.backend == "http":
        endpoint = args.endpoint or os.environ.get("AUTOUS_LLM_ENDPOINT", "")
        spec = LLMBackendSpec(
            kind="http_chat",
            endpoint_url=endpoint,
            model_name=args.model,
            auth_token=os.environ.get("AUTOUS_LLM_TOKEN", ""),
        )
    else:
        spec = LLMBackendSpec(kind="mock", model_name=args.model)
    backend = backend_from_spec(spec)
    prompt = build_prompt(opinion, ctx)
    report = generate_report(prompt, backend, spec=spec)
    print(render_report(report.preliminary_diagnosis, report.justification,
                        report.follow_up))
    _say(f"opinion: {opinion.label_text} ({opinion.confidence:.2f}); "
         f"backend {report.model_id}, {report.latency_ms} ms")
    return EXIT_OK


# ---------------------------------------------------------------------------
# scoring and plotting
# ---------------------------------------------------------------------------

def _read_grades(path: str, case_id: str):
    from .assessment import Grade

    grades = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split(",")]
            if parts[0] == "case_id":  # header
                continue
            if len(parts) != 4:
                raise ValidationError(
                    f"{path}:{line_no}: expected case_id,rater_id,role,score"
                )
            if parts[0] != case_id:
                continue
            grades.append(Grade(rater_id=parts[1], role=parts[2],
                                score=int(parts[3])))
    if not grades:
        raise ValidationError(f"{path}: no grades for case {case_id!r}")
    return grades


def cmd_score(args) -> int:
    from .assessment import (
        aggregate_likert,
        final_display,
        final_score,
        meteor,
    )

    grades = _read_grades(args.grades, args.case)
    if args.meteor is not None:
        meteor_value = args.meteor
    else:
        if not (args.hypothesis and args.reference):
            raise ValidationError(
                "provide --meteor or both --hypothesis and --reference"
            )
        with open(args.hypothesis, encoding="utf-8") as fh:
            hyp = fh.read()
        with open(args.reference, encoding="utf-8") as fh:
            ref = fh.read()
        meteor_value = meteor(hyp, ref)

    s_amateur, s_expert = aggregate_likert(grades)
    final = final_score(s_amateur, s_expert, meteor_value)
    display = final_display(final)
    print(display)
    _say(f"S_amateur={s_amateur:.4f} S_expert={s_expert:.4f} "
         f"meteor={meteor_value:.4f} final={final:.4f}")
    if args.out:
        line = (f"{args.case},{s_amateur:.4f},{s_expert:.4f},"
                f"{meteor_value:.4f},{final:.4f}")
        header = "case_id,S_amateur,S_expert,meteor,final"
        exists = os.path.exists(args.out)
        with open(args.out, "a", encoding="utf-8") as fh:
            if not exists:
                fh.write(header + "\n")
            fh.write(line + "\n")
        _say(f"appended to {args.out}")
    return EXIT_OK


def cmd_plot(args) -> int:
    if not args.radar and not args.loss_curve:
        raise ValidationError("nothing to plot: pass --radar and/or --loss-curve")
    if args.radar:
        from .train_eval.reporting import plot_radar

        plot_radar(args.radar, args.out)
        print(f"wrote {args.out}")
    if args.loss_curve:
        import matplotlib

        matplotlib.use("Agg")
        import matplotlib.pyplot as plt

        steps, losses = [], []
        with open(args.loss_curve, encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line or line.startswith("step"):
                    continue
                step, loss = line.split(",")
                steps.append(int(step))
                losses.append(float(loss))
        out = args.loss_out or (os.path.splitext(args.loss_curve)[0] + ".png")
        fig, ax = plt.subplots(figsize=(6, 4))
        ax.plot(steps, losses)
        ax.set_xlabel("step")
        ax.set_ylabel("train loss")
        fig.savefig(out, bbox_inches="tight", dpi=120)
        plt.close(fig)
        print(f"wrote {out}")
    return EXIT_OK


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    app = create_app(
        store_dir=args.store,
        checkpoint_path=args.checkpoint,
        max_upload_bytes=args.max_upload_mb * 1024 * 1024,
    )
    _say(f"serving on {args.host}:{args.port} "
         f"(store {args.store or os.environ.get('AUTOUS_STORE_DIR', '?')})")
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="autous",
        description="Ultrasound video classification and diagnosis toolkit. "
        "Env vars: AUTOUS_LLM_ENDPOINT, AUTOUS_LLM_TOKEN (http backend), "
        "AUTOUS_STORE_DIR (service store).",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    dataset = sub.add_parser("dataset", help="manifest curation")
    dsub = dataset.add_subparsers(dest="dataset_command", required=True)

    p = dsub.add_parser("filter", help="apply the accuracy acceptance rule")
    p.add_argument("--acc", type=float, required=True,
                   help="baseline classifier accuracy in [0,1]")
    p.add_argument("--classes", type=int, required=True)
    p.add_argument("--theta", type=float, default=0.4)
    p.add_argument("--log-base", type=_parse_log_base, default=math.e,
                   metavar="BASE", help="log base (default natural)")
    p.set_defaults(func=cmd_dataset_filter)

    p = dsub.add_parser("merge", help="merge/rename categories")
    p.add_argument("--manifest", required=True)
    p.add_argument("--map", action="append", required=True,
                   metavar="OLD_ID=NewName")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dataset_merge)

    p = dsub.add_parser("split", help="stratified train/test split")
    p.add_argument("--manifest", required=True)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_dataset_split)

    def add_train_flags(p, epochs_default):
        p.add_argument("--preset", choices=("tiny", "full"), default="tiny")
        p.add_argument("--model-seed", type=int, default=1)
        p.add_argument("--epochs", type=int, default=epochs_default)
        p.add_argument("--lr", type=float, default=5e-3)
        p.add_argument("--batch-size", type=int, default=4)
        p.add_argument("--seed", type=int, default=0)

    p = sub.add_parser("train", help="train a classifier")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="checkpoint output path")
    p.add_argument("--loss-curve", help="optional step,loss csv output")
    add_train_flags(p, epochs_default=10)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("eval", help="evaluate a checkpoint on a split")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--manifest", required=True)
    p.add_argument("--split", default="test")
    p.add_argument("--report-dir")
    p.add_argument("--variant", default="full",
                   help="variant name used in emitted tables")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="train and compare path-removal variants")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True, help="report output directory")
    add_train_flags(p, epochs_default=10)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("classify", help="classify one clip")
    p.add_argument("video")
    p.add_argument("--checkpoint", required=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("diagnose", help="classify then generate a report")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--video", required=True)
    p.add_argument("--chief-complaint", required=True)
    p.add_argument("--physical-exam", default="")
    p.add_argument("--additional-info", default="")
    p.add_argument("--backend", choices=("mock", "http"), default="mock")
    p.add_argument("--endpoint", default="")
    p.add_argument("--model", default="DeepSeek-R1-7B")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("score", help="final score from grades plus METEOR")
    p.add_argument("--grades", required=True,
                   help="csv: case_id,rater_id,role,score")
    p.add_argument("--case", required=True)
    p.add_argument("--meteor", type=float)
    p.add_argument("--hypothesis", help="generated report text file")
    p.add_argument("--reference", help="reference diagnosis text file")
    p.add_argument("--out", help="append case_id,S_amateur,S_expert,meteor,final")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("plot", help="render radar/loss-curve files")
    p.add_argument("--radar")
    p.add_argument("--out", default="radar.png")
    p.add_argument("--loss-curve")
    p.add_argument("--loss-out")
    p.set_defaults(func=cmd_plot)

    p = sub.add_parser("serve", help="run the HTTP case service")
    p.add_argument("--store", default=os.environ.get("AUTOUS_STORE_DIR", ""))
    p.add_argument("--checkpoint")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.add_argument("--max-upload-mb", type=int, default=64)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ValidationError as exc:
        _say(f"error: {exc}")
        return EXIT_VALIDATION
    except AutoUSError as exc:
        _say(f"error: {exc}")
        return EXIT_RUNTIME
    except OSError as exc:
        _say(f"error: {exc}")
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
