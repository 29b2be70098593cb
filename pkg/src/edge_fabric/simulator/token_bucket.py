# src/edge_fabric/simulator/token_bucket.py
SENT = "sent"
SENT_OVERSHOOT = "sent_overshoot"
DEFERRED = "deferred"

# Burst allowance in seconds of the current cap.
BURST_SECONDS = 2.0


class TokenBucket:
    """
    Bit-granular token bucket driven by simulated time.

    Tokens may go negative when a head-of-line payload is let through early; the debt is
    bounded by the capacity and repaid by later refills.
    """

    def __init__(self, cap_bits_per_s: float, tokens_bits: float = None):
        self.cap_bits_per_s = cap_bits_per_s
        self.capacity_bits = BURST_SECONDS * cap_bits_per_s
        self.tokens_bits = self.capacity_bits if tokens_bits is None else tokens_bits

    def set_cap(self, cap_bits_per_s: float) -> None:
        """Apply a new cap. A reduction revokes any positive balance."""
        if cap_bits_per_s < self.cap_bits_per_s:
            self.tokens_bits = min(self.tokens_bits, 0.0)
        self.cap_bits_per_s = cap_bits_per_s
        self.capacity_bits = BURST_SECONDS * cap_bits_per_s
        self.tokens_bits = min(self.tokens_bits, self.capacity_bits)

    def refill(self, seconds: float) -> None:
        self.tokens_bits = min(self.capacity_bits, self.tokens_bits + self.cap_bits_per_s * seconds)

    def __repr__(self):
        return f"TokenBucket(cap={self.cap_bits_per_s:g}, tokens={self.tokens_bits:g}/{self.capacity_bits:g})"


def transmit(bucket: TokenBucket, payload_bits: float, head_of_line: bool = True) -> str:
    """Try to send a payload: SENT, SENT_OVERSHOOT (tokens go into debt) or DEFERRED."""
    if bucket.tokens_bits >= payload_bits:
        bucket.tokens_bits -= payload_bits
        return SENT
    if head_of_line and bucket.tokens_bits > 0 and payload_bits <= bucket.tokens_bits + bucket.capacity_bits:
        bucket.tokens_bits -= payload_bits
        return SENT_OVERSHOOT
    return DEFERRED
