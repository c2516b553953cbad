"""FastAPI application implementing the denoiser wire protocol v1.

Framing (identical to the client's): request and response bodies are one
UTF-8 JSON header line terminated by '\\n', followed by raw little-endian
float32 bytes in C order. Endpoints:

    POST /v1/epsilon   noise predictions, one tensor per conditioning
    POST /v1/frames    conditioning-frame registration (PNG + tag),
                       idempotent by content hash
    GET  /v1/health    {"status", "model_name", "protocol"}
    POST /v1/encode    pixel video -> latent tensor (codec-dependent)
    POST /v1/decode    latent tensor -> pixel video

Models plug in through the adapter interface below. The built-in "echo"
adapter bypasses any model: epsilon returns zero tensors and the codec is
the identity, which makes the whole HTTP path testable without a GPU. A real
adapter wraps a pretrained image-conditioned video diffusion pipeline; it
must expose an epsilon-prediction view of its native parameterization (see
README for the conversion notes) and may implement encode/decode with its
VAE. Requests are serialized per model instance by a lock, absorbing client
concurrency into a queue.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass

import numpy as np
from fastapi import FastAPI, Request, Response

PROTOCOL_VERSION = "1"


@dataclass
class ServerConfig:
    model: str = "echo"
    device: str = "cpu"
    max_tensor_bytes: int = 256 * 2 ** 20
    protocol: str = PROTOCOL_VERSION


class EchoModel:
    """Model bypass: zero noise predictions and an identity codec."""

    name = "echo"

    def __init__(self, config: ServerConfig):
        self.config = config
        self.ready = True

    def epsilon(self, x_t: np.ndarray, t: int, tags) -> list:
        return [np.zeros_like(x_t) for _ in tags]

    def encode(self, tensor: np.ndarray) -> np.ndarray:
        return tensor

    def decode(self, tensor: np.ndarray) -> np.ndarray:
        return tensor


MODEL_ADAPTERS = {"echo": EchoModel}


def _error(code: int, message: str) -> Response:
    return Response(content=json.dumps({"error": message}),
                    status_code=code, media_type="application/json")


def _split_body(body: bytes):
    newline = body.find(b"\n")
    if newline < 0:
        raise ValueError("missing header line")
    header = json.loads(body[:newline].decode())
    if not isinstance(header, dict):
        raise ValueError("header is not a JSON object")
    return header, body[newline + 1:]


def _pack(header: dict, tensors) -> bytes:
    body = json.dumps(header, sort_keys=True).encode() + b"\n"
    for t in tensors:
        body += np.ascontiguousarray(t, dtype="<f4").tobytes()
    return body


def _parse_tensor(header: dict, raw: bytes) -> np.ndarray:
    if header.get("dtype") != "f32":
        raise ValueError(f"unsupported dtype {header.get('dtype')!r}")
    shape = tuple(int(x) for x in header["shape"])
    expected = int(np.prod(shape)) * 4
    if len(raw) != expected:
        raise ValueError(f"tensor carries {len(raw)} bytes, "
                         f"expected {expected}")
    return np.frombuffer(raw, dtype="<f4").reshape(shape)


def create_app(config: ServerConfig | None = None, model=None) -> FastAPI:
    config = config or ServerConfig()
    if model is None:
        adapter = MODEL_ADAPTERS.get(config.model)
        if adapter is None:
            raise ValueError(f"unknown model adapter {config.model!r}")
        model = adapter(config)

    app = FastAPI(title="ctrack denoiser server")
    frames: dict = {}
    lock = threading.Lock()

    @app.get("/v1/health")
    def health():
        return {"status": "ok" if getattr(model, "ready", False) else "loading",
                "model_name": model.name, "protocol": config.protocol}

    @app.post("/v1/frames")
    async def register_frame(request: Request):
        body = await request.body()
        if len(body) > config.max_tensor_bytes:
            return _error(413, "payload too large")
        try:
            header, png = _split_body(body)
            tag = header["tag"]
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            return _error(400, f"malformed frame registration: {exc}")
        if not png:
            return _error(400, "missing frame bytes")
        frame_id = hashlib.sha256(png).hexdigest()
        frames[frame_id] = {"tag": tag, "png": png}
        return {"frame_id": frame_id}

    @app.post("/v1/epsilon")
    async def epsilon(request: Request):
        body = await request.body()
        if len(body) > config.max_tensor_bytes:
            return _error(413, "payload too large")
        if not getattr(model, "ready", False):
            return _error(503, "model not ready")
        try:
            header, raw = _split_body(body)
            if header.get("protocol") != config.protocol:
                return _error(400, f"protocol {header.get('protocol')!r} "
                                   f"not supported")
            t = int(header["t"])
            conds = header["conditionings"]
            tags = [c["tag"] for c in conds]
            x_t = _parse_tensor(header, raw)
        except (ValueError, KeyError, TypeError,
                json.JSONDecodeError) as exc:
            return _error(400, f"malformed epsilon request: {exc}")
        unknown = [c["frame_id"] for c in conds
                   if c.get("frame_id") not in frames]
        if unknown:
            return _error(400, f"unregistered frame ids: {unknown}")
        with lock:
            tensors = model.epsilon(x_t, t, tags)
        reply = {"protocol": config.protocol, "shape": list(x_t.shape),
                 "dtype": "f32", "count": len(tensors)}
        return Response(content=_pack(reply, tensors),
                        media_type="application/octet-stream")

    def _codec(body: bytes, fn):
        if len(body) > config.max_tensor_bytes:
            return _error(413, "payload too large")
        if not getattr(model, "ready", False):
            return _error(503, "model not ready")
        try:
            header, raw = _split_body(body)
            tensor = _parse_tensor(header, raw)
        except (ValueError, KeyError, json.JSONDecodeError) as exc:
            return _error(400, f"malformed codec request: {exc}")
        with lock:
            out = fn(tensor)
        reply = {"protocol": config.protocol, "shape": list(out.shape),
                 "dtype": "f32", "count": 1}
        return Response(content=_pack(reply, [out]),
                        media_type="application/octet-stream")

    @app.post("/v1/encode")
    async def encode(request: Request):
        return _codec(await request.body(), model.encode)

    @app.post("/v1/decode")
    async def decode(request: Request):
        return _codec(await request.body(), model.decode)

    return app
