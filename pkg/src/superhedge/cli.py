"""Command-line client for the pricing service.

Commands build a JSON request from the market/payoff files and send it
through the HTTP service layer: in-process by default, or to a running
server when --server is given.  Reports are printed as JSON or CSV with
12 significant digits.
"""

from __future__ import annotations

import argparse
import asyncio
import csv
import io
import json
import sys

import httpx

from .errors import InputError

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_VERIFY = 2

_SIG_DIGITS = 12


def _fmt(value) -> str:
    if isinstance(value, float):
        return f"{value:.{_SIG_DIGITS}g}"
    return "" if value is None else str(value)


def _round_floats(doc):
    if isinstance(doc, float):
        return float(f"{doc:.{_SIG_DIGITS}g}")
    if isinstance(doc, list):
        return [_round_floats(v) for v in doc]
    if isinstance(doc, dict):
        return {k: _round_floats(v) for k, v in doc.items()}
    return doc


def _load_json(path: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _fail(message: str) -> int:
    print(f"error: {message}", file=sys.stderr)
    return EXIT_INPUT


def _post(server: str | None, route: str, payload: dict) -> httpx.Response:
    if server:
        return httpx.post(server.rstrip("/") + route, json=payload, timeout=120.0)

    async def go() -> httpx.Response:
        from .service import app

        transport = httpx.ASGITransport(app=app)
        async with httpx.AsyncClient(
            transport=transport, base_url="http://superhedge.local"
        ) as client:
            return await client.post(route, json=payload)

    return asyncio.run(go())


def _emit(text: str, out: str | None) -> None:
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        print(text, end="" if text.endswith("\n") else "\n")


def _backtest_csv(doc: dict) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(["step", "state", "setup_cost", "upper_price", "delta", "delta_discounted"])
    for row in doc["rows"]:
        writer.writerow(
            [
                row["step"],
                row["state"],
                _fmt(row["setup_cost"]),
                _fmt(row["upper_price"]),
                _fmt(row["delta"]),
                _fmt(row["delta_discounted"]),
            ]
        )
    writer.writerow(["accumulated", "", "", "", "", _fmt(doc["accumulated"])])
    return buffer.getvalue()


def _verify_csv(doc: dict) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer)
    writer.writerow(["step", "state", "upper_price", "oracle", "deviation"])
    for row in doc["rows"]:
        writer.writerow(
            [
                row["step"],
                row["state"],
                _fmt(row["upper_price"]),
                _fmt(row["oracle"]),
                _fmt(row["deviation"]),
            ]
        )
    writer.writerow(["max", "", "", "", _fmt(doc["max_abs_deviation"])])
    return buffer.getvalue()


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="superhedge",
        description="Upper-bound pricing and minimum-cost super-hedging reports.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p: argparse.ArgumentParser, state_help: str) -> None:
        p.add_argument("--market", required=True, help="market JSON file")
        p.add_argument("--payoff", required=True, help="payoff JSON file")
        p.add_argument("--state", default="", help=state_help)
        p.add_argument("--out", default=None, help="write the report here instead of stdout")
        p.add_argument("--server", default=None, help="URL of a running service; default runs in-process")

    p_price = sub.add_parser("price", help="upper no-arbitrage price at a node")
    add_common(p_price, "comma-separated moves in external asset order, e.g. 01,10")
    p_price.add_argument("--step", type=int, default=None, help="time index; defaults to the state length")
    p_price.add_argument("--mode", choices=["compressed", "naive"], default="compressed")
    p_price.add_argument("--format", choices=["json"], default="json")

    p_hedge = sub.add_parser("hedge", help="minimum-cost super-hedge at a node")
    add_common(p_hedge, "comma-separated moves in external asset order")
    p_hedge.add_argument("--step", type=int, default=None)
    p_hedge.add_argument("--format", choices=["json"], default="json")

    p_back = sub.add_parser("backtest", help="hedge along a full path and report residuals")
    add_common(p_back, "full path as comma-separated moves, e.g. 01,01")
    p_back.add_argument("--format", choices=["csv", "json"], default="csv")

    p_verify = sub.add_parser("verify", help="cross-check the closed form against the oracle")
    add_common(p_verify, "(unused)")
    p_verify.add_argument("--tol", type=float, default=1e-10, help="max allowed deviation")
    p_verify.add_argument("--format", choices=["json", "csv"], default="json")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--host", default="127.0.0.1")
    p_serve.add_argument("--port", type=int, default=8000)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)

    if args.command == "serve":
        import uvicorn

        from .service import app

        uvicorn.run(app, host=args.host, port=args.port)
        return EXIT_OK

    try:
        payload: dict = {
            "market": _load_json(args.market),
            "payoff": _load_json(args.payoff),
        }
    except InputError as exc:
        return _fail(str(exc))
    if args.command in ("price", "hedge"):
        payload["state"] = args.state
        if args.step is not None:
            payload["step"] = args.step
        if args.command == "price":
            payload["mode"] = args.mode
    elif args.command == "backtest":
        payload["state"] = args.state
    else:
        payload["tol"] = args.tol

    try:
        response = _post(args.server, f"/{args.command}", payload)
    except httpx.HTTPError as exc:
        return _fail(f"request failed: {exc}")

    if response.status_code != 200:
        try:
            doc = response.json()
        except ValueError:
            doc = {"detail": response.text}
        detail, kind = doc.get("detail"), doc.get("error", "")
        print(f"error: {detail}", file=sys.stderr)
        return EXIT_VERIFY if kind == "VerificationFailure" else EXIT_INPUT

    doc = response.json()
    if args.format == "csv":
        text = _backtest_csv(doc) if args.command == "backtest" else _verify_csv(doc)
    else:
        text = json.dumps(_round_floats(doc), indent=2)
    _emit(text, args.out)

    if args.command == "verify" and not doc["passed"]:
        print(
            f"verification failed: max deviation {_fmt(doc['max_abs_deviation'])} "
            f"> {_fmt(doc['tolerance'])}",
            file=sys.stderr,
        )
        return EXIT_VERIFY
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
