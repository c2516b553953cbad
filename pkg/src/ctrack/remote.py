"""HTTP client for the denoiser wire protocol (v1).

Framing, shared by every endpoint that carries a tensor: the request/response
body is one UTF-8 JSON line terminated by '\\n', followed immediately by raw
little-endian float32 bytes in C order.

    POST /v1/epsilon   header {"protocol": "1", "t": int, "shape": [F,H,W,C],
                       "dtype": "f32", "conditionings": [{"tag": ..,
                       "frame_id": ..}, ...]} + x_t bytes. The response header
                       repeats protocol/shape/dtype plus "count": N and is
                       followed by N tensors concatenated, one per
                       conditioning, order preserved.
    POST /v1/frames    header {"tag": ..} + PNG bytes -> {"frame_id": ..};
                       registration is idempotent by content hash.
    GET  /v1/health    {"status": .., "model_name": .., "protocol": "1"}
    POST /v1/encode, /v1/decode   optional latent codec, same framing.

Transport failures are retried with exponential backoff and then surfaced as
a retriable BackendError carrying the endpoint and step index; a protocol
version mismatch is fatal; NaNs in a response raise NumericError.
"""

from __future__ import annotations

import hashlib
import io
import json
import time

import numpy as np
import requests

from .errors import BackendError, InvalidArgumentError, NumericError
from .backends import Denoiser

__all__ = ["RemoteDenoiser", "PROTOCOL_VERSION",
           "pack_tensor_message", "unpack_tensor_message"]

PROTOCOL_VERSION = "1"


def pack_tensor_message(header: dict, tensors) -> bytes:
    """JSON line + concatenated float32 LE tensor bytes."""
    body = json.dumps(header).encode() + b"\n"
    for t in tensors:
        body += np.ascontiguousarray(t, dtype="<f4").tobytes()
    return body


def unpack_tensor_message(body: bytes):
    """Inverse of pack_tensor_message; returns (header, raw tensor bytes)."""
    newline = body.find(b"\n")
    if newline < 0:
        raise InvalidArgumentError("tensor message has no header line")
    header = json.loads(body[:newline].decode())
    return header, body[newline + 1:]


class RemoteDenoiser(Denoiser):
    """Client for a denoiser server speaking protocol v1.

    Conditioning frames are registered once (cached by content hash); both
    conditionings of a sampling step travel in a single /v1/epsilon request so
    the server can share compute. Safe for concurrent use: each request is
    independent and the session pools connections.
    """

    def __init__(self, endpoint: str, timeout: float = 30.0, retries: int = 3,
                 backoff: float = 0.2):
        self.endpoint = endpoint.rstrip("/")
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self._session = requests.Session()
        self._frame_ids: dict = {}
        self._checked_protocol = False

    # -- transport ---------------------------------------------------------

    def _request(self, method: str, path: str, data=None, step=None):
        url = self.endpoint + path
        last = None
        for attempt in range(self.retries + 1):
            try:
                resp = self._session.request(method, url, data=data,
                                             timeout=self.timeout)
                if resp.status_code >= 500:
                    raise requests.RequestException(
                        f"server error {resp.status_code}")
                return resp
            except requests.RequestException as exc:
                last = exc
                if attempt < self.retries:
                    time.sleep(self.backoff * 2 ** attempt)
        raise BackendError(
            f"{url} unreachable after {self.retries + 1} attempts"
            + (f" (step {step})" if step is not None else "") + f": {last}",
            retriable=True, endpoint=url, step=step)

    def check_health(self):
        resp = self._request("GET", "/v1/health")
        info = resp.json()
        if info.get("protocol") != PROTOCOL_VERSION:
            raise BackendError(
                f"protocol mismatch: server speaks {info.get('protocol')!r}, "
                f"client speaks {PROTOCOL_VERSION!r}",
                retriable=False, endpoint=self.endpoint)
        return info

    # -- conditioning registration ------------------------------------------

    def _frame_png(self, frame: np.ndarray) -> bytes:
        from PIL import Image

        buf = io.BytesIO()
        Image.fromarray(np.asarray(frame, dtype=np.uint8)).save(buf, "PNG")
        return buf.getvalue()

    def register_frame(self, frame: np.ndarray, tag: str, step=None) -> str:
        png = self._frame_png(frame)
        key = (tag, hashlib.sha256(png).hexdigest())
        if key in self._frame_ids:
            return self._frame_ids[key]
        body = json.dumps({"tag": tag}).encode() + b"\n" + png
        resp = self._request("POST", "/v1/frames", data=body, step=step)
        if resp.status_code != 200:
            raise BackendError(f"frame registration failed: {resp.status_code}",
                               retriable=False, endpoint=self.endpoint)
        frame_id = resp.json()["frame_id"]
        self._frame_ids[key] = frame_id
        return frame_id

    # -- optional latent codec ------------------------------------------------

    def encode(self, tensor: np.ndarray) -> np.ndarray:
        """Pixel video -> latent tensor via the server's codec (float32)."""
        return self._codec("/v1/encode", tensor)

    def decode(self, tensor: np.ndarray) -> np.ndarray:
        """Latent tensor -> pixel video via the server's codec (float32)."""
        return self._codec("/v1/decode", tensor)

    def _codec(self, path, tensor):
        tensor = np.ascontiguousarray(tensor, dtype="<f4")
        header = {"protocol": PROTOCOL_VERSION, "shape": list(tensor.shape),
                  "dtype": "f32"}
        resp = self._request("POST", path, data=pack_tensor_message(header,
                                                                    [tensor]))
        if resp.status_code != 200:
            raise BackendError(f"{path} failed with {resp.status_code}",
                               retriable=False, endpoint=self.endpoint)
        reply, raw = unpack_tensor_message(resp.content)
        return np.frombuffer(raw, dtype="<f4").reshape(tuple(reply["shape"]))

    # -- denoising ----------------------------------------------------------

    def epsilon(self, x_t, t, cond):
        return self.epsilon_many(x_t, t, [cond])[0]

    def epsilon_many(self, x_t, t, conds) -> list:
        if not self._checked_protocol:
            self.check_health()
            self._checked_protocol = True
        x_t = np.asarray(x_t)
        header = {
            "protocol": PROTOCOL_VERSION,
            "t": int(t),
            "shape": list(x_t.shape),
            "dtype": "f32",
            "conditionings": [
                {"tag": c.tag,
                 "frame_id": self.register_frame(c.frame, c.tag, step=int(t))}
                for c in conds
            ],
        }
        body = pack_tensor_message(header, [x_t])
        resp = self._request("POST", "/v1/epsilon", data=body, step=int(t))
        if resp.status_code != 200:
            raise BackendError(
                f"epsilon request failed with {resp.status_code} at step {t}",
                retriable=False, endpoint=self.endpoint, step=int(t))
        reply, raw = unpack_tensor_message(resp.content)
        if reply.get("protocol") != PROTOCOL_VERSION:
            raise BackendError(
                f"protocol mismatch in response: {reply.get('protocol')!r}",
                retriable=False, endpoint=self.endpoint, step=int(t))
        count = int(reply.get("count", len(conds)))
        shape = tuple(reply.get("shape", x_t.shape))
        per = int(np.prod(shape))
        data = np.frombuffer(raw, dtype="<f4")
        if data.size != count * per:
            raise BackendError(
                f"response carries {data.size} values, expected {count * per}",
                retriable=False, endpoint=self.endpoint, step=int(t))
        out = []
        for i in range(count):
            tensor = data[i * per:(i + 1) * per].reshape(shape).astype(np.float64)
            if not np.all(np.isfinite(tensor)):
                raise NumericError(
                    f"non-finite values in server response at step {t}")
            out.append(tensor)
        return out
