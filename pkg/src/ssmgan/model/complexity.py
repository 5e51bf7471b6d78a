"""MAC and parameter accounting."""

from collections import OrderedDict
from dataclasses import dataclass, field

from .weights import required_shapes


@dataclass
class MacReport:
    """Per-layer ``(name, rate_hz, macs_per_sample, macs_per_second)`` rows plus total."""

    rows: list = field(default_factory=list)

    def add(self, name, rate, per_sample):
        self.rows.append((name, int(rate), int(per_sample), int(rate) * int(per_sample)))

    @property
    def total(self):
        return sum(r[3] for r in self.rows)

    @property
    def gmacs(self):
        return self.total / 1e9

    def table(self):
        lines = [f"{'layer':<14}{'rate Hz':>9}{'MAC/sample':>13}{'MAC/s':>16}"]
        for name, rate, per, per_s in self.rows:
            lines.append(f"{name:<14}{rate:>9}{per:>13,}{per_s:>16,}")
        lines.append(f"{'total':<14}{'':>9}{'':>13}{self.total:>16,}")
        return "\n".join(lines)


def closed_form_block_macs(L, K, F):
    """``(F + 5L) L K``: MACs per output sample of one residual block."""
    return (F + 5 * L) * L * K


def closed_form_upsampler_macs(L, K):
    return L * L * K


def mac_count(config):
    """Closed-form complexity: ``(F+5L)LK`` per block sample, ``L^2 K`` per upsampler sample.

    Activations, normalization, the conditioning head, the output conv and the
    filter bank are left out, matching the usual accounting for this family of
    generators. Integer arithmetic throughout.
    """
    L, K, F = config.hidden_channels, config.kernel_size, config.cond_channels
    report = MacReport()
    for i, ratio in enumerate(config.upsample_ratios()):
        rate = config.rate_schedule[i]
        if ratio is not None:
            report.add(f"up{i}", rate, closed_form_upsampler_macs(L, K))
        report.add(f"block{i}", rate, closed_form_block_macs(L, K, F))
    return report


def block_macs_per_sample(config, cond_width=None):
    """MACs per output sample of one residual block as built (convs only)."""
    L, K = config.hidden_channels, config.kernel_size
    f = config.cond_channels if cond_width is None else cond_width
    tade = f * L * K + 2 * L * L * K
    content = 2 * (L * 2 * L * K)
    return tade + content


def measured_mac_count(config):
    """MACs of every convolution in the built graph, at its own rate."""
    shapes = required_shapes(config)
    report = MacReport()

    def conv_macs(name):
        out, inp, k = shapes[f"{name}.weight"]
        return out * inp * k

    report.add("cond", config.frame_rate, conv_macs("cond"))
    for i, ratio in enumerate(config.upsample_ratios()):
        rate = config.rate_schedule[i]
        if ratio is not None:
            report.add(f"up{i}", rate, conv_macs(f"block{i}.up"))
        per = sum(conv_macs(f"block{i}.{p}") for p in
                  ("tade.cond", "tade.gamma", "tade.beta", "conv1", "conv2"))
        report.add(f"block{i}", rate, per)
    band_rate = config.sample_rate // config.n_bands
    report.add("out", band_rate, conv_macs("out"))
    taps = config.pqmf_taps + 1
    # polyphase synthesis: every output sample sums ceil(taps/N) taps from each band
    report.add("pqmf", config.sample_rate, config.n_bands * -(-taps // config.n_bands))
    return report


@dataclass
class ParamReport:
    breakdown: OrderedDict

    @property
    def total(self):
        return sum(self.breakdown.values())

    def table(self, reference=None):
        lines = [f"{'module':<10}{'params':>12}"]
        for name, n in self.breakdown.items():
            lines.append(f"{name:<10}{n:>12,}")
        lines.append(f"{'total':<10}{self.total:>12,}")
        if reference:
            delta = (self.total - reference) / reference
            lines.append(f"{'reference':<10}{reference:>12,}  ({delta:+.1%})")
        return "\n".join(lines)


def _module_of(name):
    head = name.split(".", 1)[0]
    return head


def param_count(config, weights=None):
    """Stored scalars grouped by top-level module (prior, cond, blockN, out).

    Without ``weights`` the count comes from the required tensor shapes.
    """
    breakdown = OrderedDict()
    if weights is None:
        items = ((n, s) for n, s in required_shapes(config).items())
        sizes = ((n, _prod(s)) for n, s in items)
    else:
        sizes = ((n, int(a.size)) for n, a in weights.items())
    for name, size in sizes:
        mod = _module_of(name)
        breakdown[mod] = breakdown.get(mod, 0) + size
    return ParamReport(breakdown)


def _prod(shape):
    n = 1
    for s in shape:
        n *= s
    return n
