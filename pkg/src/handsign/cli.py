"""Command-line entry points.

    handsign generate  --out data.csv [--per-class 120 --jitter 0.01 --seed 0 --no-placement]
    handsign grid      --data data.csv --out results/ [--seed 0 --holdout --workers 2 --epochs 128]
    handsign train     --algo knn|rf|mlp --spec "round+shift+scale@cubical" --data train.csv --out model.npz
    handsign evaluate  --model model.npz --data test.csv
    handsign predict   --model model.npz --features "x1,y1,z1,...,z21"
    handsign serve     --model model.npz [--host 127.0.0.1 --port 8765 --samples samples.csv]
"""

import argparse
import sys

import numpy as np

from . import data, forest, knn, mlp
from .grid import AlgorithmKind, render_table, run_grid, write_grid_outputs
from .metrics import evaluate, per_class_accuracy
from .mlp import TrainConfig
from .normalize import PipelineSpec
from .persist import (
    fingerprint,
    load_model,
    make_artifact,
    predict_batch,
    predict_frame,
    save_model,
)


def _cmd_generate(args):
    ds = data.generate_synthetic(args.per_class, args.jitter, not args.no_placement, args.seed)
    data.write_csv_file(ds, args.out)
    print(f"wrote {len(ds)} samples ({args.per_class} per letter) to {args.out}")


def _cmd_grid(args):
    ds = data.read_csv_file(args.data)
    cfg = TrainConfig(epochs=args.epochs)
    report = run_grid(ds, seed=args.seed, holdout=args.holdout,
                      mlp_config=cfg, workers=args.workers)
    write_grid_outputs(report, args.out)
    print(render_table(report, "markdown"))
    for name, avg in report.averages.items():
        print(f"average {name}: {100 * avg:.2f}")
    failed = [c for c in report.cells if c.error is not None]
    for c in failed:
        print(f"cell {c.spec} x {c.algorithm.value} failed: {c.error}", file=sys.stderr)
    print(f"outputs in {args.out}")
    return 1 if failed else 0


def _cmd_train(args):
    ds = data.read_csv_file(args.data)
    spec = PipelineSpec.parse(args.spec)
    from .normalize import apply_pipeline_batch

    transformed = ds.with_frames(apply_pipeline_batch(ds.frames, spec))
    algo = AlgorithmKind(args.algo)
    if algo is AlgorithmKind.KNN:
        payload = knn.knn_fit(transformed, args.k)
    elif algo is AlgorithmKind.RANDOM_FOREST:
        payload = forest.rf_fit(transformed, args.n, args.seed)
    else:
        model, curves = mlp.mlp_train(
            mlp.mlp_init(seed=args.seed), transformed,
            TrainConfig(epochs=args.epochs, seed=args.seed),
        )
        payload = model
        if args.epochs:
            print(f"final training loss {curves.loss[-1]:.4f}, accuracy {curves.accuracy[-1]:.4f}")
    artifact = make_artifact(algo, spec, payload)
    save_model(artifact, args.out)
    print(f"saved {algo.value} model {fingerprint(artifact)[:12]} to {args.out}")


def _cmd_evaluate(args):
    artifact = load_model(args.model)
    ds = data.read_csv_file(args.data)
    acc, cm = evaluate(lambda feats: predict_batch(artifact, ds.frames), ds)
    print(f"accuracy: {100 * acc:.2f}% on {len(ds)} samples")
    per_class = per_class_accuracy(cm)
    for i, letter in enumerate(data.LETTERS):
        if not np.isnan(per_class[i]):
            print(f"  {letter}: {100 * per_class[i]:.1f}%")


def _cmd_predict(args):
    artifact = load_model(args.model)
    values = [float(v) for v in args.features.split(",")]
    frame = data.features_to_frame(values)
    response = predict_frame(artifact, frame)
    print(response.label)
    if response.probabilities:
        top = sorted(response.probabilities.items(), key=lambda kv: -kv[1])[:3]
        print("top:", ", ".join(f"{letter}={p:.3f}" for letter, p in top))


def _cmd_serve(args):
    from .server import make_server

    artifact = load_model(args.model)
    server = make_server(artifact, args.host, args.port, args.samples)
    print(f"serving {artifact.algorithm.value} model on http://{args.host}:{server.server_address[1]}")
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass
    finally:
        server.server_close()


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="handsign", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="write a seeded synthetic dataset CSV")
    p.add_argument("--out", required=True)
    p.add_argument("--per-class", type=int, default=120)
    p.add_argument("--jitter", type=float, default=data.DEFAULT_JITTER)
    p.add_argument("--no-placement", action="store_true",
                   help="skip the random translation/scale placement noise")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_generate)

    p = sub.add_parser("grid", help="run the full preprocessing x algorithm grid")
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--holdout", action="store_true",
                   help="pick k and n on a validation split carved from train")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--epochs", type=int, default=128)
    p.set_defaults(func=_cmd_grid)

    p = sub.add_parser("train", help="train one model and save it")
    p.add_argument("--algo", required=True, choices=[a.value for a in AlgorithmKind])
    p.add_argument("--spec", required=True, help='pipeline such as "shift+scale@cuboidal"')
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--k", type=int, default=3, help="neighbours for knn")
    p.add_argument("--n", type=int, default=100, help="trees for rf")
    p.add_argument("--epochs", type=int, default=128, help="training epochs for mlp")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_train)

    p = sub.add_parser("evaluate", help="accuracy of a saved model on a CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.set_defaults(func=_cmd_evaluate)

    p = sub.add_parser("predict", help="classify one 63-value feature vector")
    p.add_argument("--model", required=True)
    p.add_argument("--features", required=True, help="63 comma-separated coordinates")
    p.set_defaults(func=_cmd_predict)

    p = sub.add_parser("serve", help="run the HTTP prediction service")
    p.add_argument("--model", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8765)
    p.add_argument("--samples", default="samples.csv")
    p.set_defaults(func=_cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        result = args.func(args)
        return int(result) if result is not None else 0
    except (data.SchemaError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
