"""JSON-line decode bridge for foreign-language hosts.

``genbench decode-bridge`` reads one configuration object from stdin, then
drives the native decoder against a host-side model: for every step it
writes ``{"need": <prefix ids>, "step": n}`` and expects a reply line
``{"probs": [...]}`` with a probability vector over the host's vocabulary.
On success it writes ``{"done": [[token, ...], ...]}`` and exits 0; on
failure ``{"error": msg, "step": n}`` and exits 4.

Every reply vector is validated per call: correct length, non-negative
entries, total within 1e-6 of 1.
"""

from __future__ import annotations

import json
import math
import sys

from .corpus import Vocabulary
from .decoding import DecodeConfig, generate
from .errors import DecodeError


class CallbackModel:
    """Language model whose distributions come from the host, one request
    per decoding step."""

    def __init__(self, vocab_size: int, ask):
        self.vocab_size = vocab_size
        self._ask = ask
        self.steps = 0
        self.current_step = 0

    def next_logprobs(self, prefix: list[int]) -> list[float]:
        step = self.steps
        self.current_step = step
        self.steps += 1
        probs = self._ask(prefix, step)
        if not isinstance(probs, list) or len(probs) != self.vocab_size:
            raise DecodeError(
                f"callback reply at step {step} must be a probability vector "
                f"of length {self.vocab_size}"
            )
        total = 0.0
        for p in probs:
            if not isinstance(p, (int, float)) or p < 0:
                raise DecodeError(
                    f"callback reply at step {step} contains a negative or "
                    f"non-numeric probability"
                )
            total += p
        if abs(total - 1.0) > 1e-6:
            raise DecodeError(
                f"callback reply at step {step} sums to {total!r}, not 1"
            )
        return [math.log(p) if p > 0 else -math.inf for p in probs]


def serve_decode_bridge(stdin=None, stdout=None) -> int:
    stdin = stdin if stdin is not None else sys.stdin
    stdout = stdout if stdout is not None else sys.stdout

    def send(obj: dict):
        stdout.write(json.dumps(obj) + "\n")
        stdout.flush()

    def ask(prefix: list[int], step: int) -> list:
        send({"need": list(prefix), "step": step})
        line = stdin.readline()
        if not line:
            raise DecodeError(f"host closed the stream at step {step}")
        reply = json.loads(line)
        if "error" in reply:
            raise DecodeError(f"host callback failed at step {step}: {reply['error']}")
        return reply.get("probs")

    model = None
    try:
        header = stdin.readline()
        if not header:
            raise DecodeError("no configuration received")
        config = json.loads(header)
        vocab_tokens = config.get("vocab")
        if not isinstance(vocab_tokens, list) or len(vocab_tokens) < 4:
            raise DecodeError("configuration needs a vocab list with the 4 specials first")
        vocab = Vocabulary([str(t) for t in vocab_tokens])
        decode_cfg = DecodeConfig(
            strategy=config.get("strategy", "greedy"),
            beam_size=int(config.get("beam_size", 5)),
            k=int(config.get("k", 10)),
            max_len=int(config.get("max_len", 30)),
            seed=int(config.get("seed", 42)),
            length_penalty=float(config.get("length_penalty", 0.0)),
        )
        count = int(config.get("count", 1))
        model = CallbackModel(len(vocab), ask)
        sequences = generate(model, decode_cfg, count=count, vocab=vocab)
        send({"done": sequences})
        return 0
    except Exception as exc:  # protocol boundary: report, never traceback
        send({"error": str(exc), "step": model.current_step if model else 0})
        return 4
