"""Exception hierarchy shared by all meshmetrics modules."""


class MeshMetricsError(Exception):
    """Base class for every error raised by this package."""


# -- topology and path validation -------------------------------------------

class DanglingEndpoint(MeshMetricsError):
    """A link references a node that is not part of the topology."""


class ChannelOutOfRange(MeshMetricsError):
    """A link uses a channel id outside [0, channel_count)."""


class DuplicateLink(MeshMetricsError):
    """Two links share the same (src, dst, channel) triple."""


class UnknownLink(MeshMetricsError):
    """A link is not part of the topology (or has no measurement)."""


class Discontiguous(MeshMetricsError):
    """Consecutive path links do not share a node."""


class RepeatedNode(MeshMetricsError):
    """A path visits the same node twice."""


# -- link measurement --------------------------------------------------------

class EmptyWindow(MeshMetricsError):
    """The delivery-ratio window is empty."""


class TooFewRecords(MeshMetricsError):
    """Not enough probe records to estimate bit statistics."""


class NoSamples(MeshMetricsError):
    """An estimator was given an empty sample list."""


class NonPositiveDelay(MeshMetricsError):
    """A packet-pair inter-arrival sample is zero or negative."""


# -- metric evaluation -------------------------------------------------------

class MetricError(MeshMetricsError):
    """Base class for per-link / per-path metric evaluation failures."""


class DeadLink(MetricError):
    """Delivery probability is zero in at least one direction."""


class NegativeVariance(MetricError):
    """A variance argument is negative."""


class BadThreshold(MetricError):
    """Retransmission threshold or loss target outside its valid range."""


class ZeroBandwidth(MetricError):
    """Link bandwidth is zero or negative."""


class EmptyPath(MetricError):
    """A path-level metric was asked to evaluate an empty path."""


class BadScale(MetricError):
    """Network-wide scaling constant (e.g. smallest transmission time) invalid."""


class BadRatio(MetricError):
    """SINR/SNR pair violates 0 < SINR <= SNR."""


class FullOutage(MetricError):
    """Every channel sample falls below the MAC outage threshold."""


class MissingSelf(MetricError):
    """An interference set does not contain the link itself."""


class ZeroContention(MetricError):
    """Sum of contention degrees is zero."""


class ZeroRate(MetricError):
    """Nominal link rate is zero or negative."""


# -- routing -----------------------------------------------------------------

class RoutingError(MeshMetricsError):
    """Base class for route-selection failures."""


class NoRoute(RoutingError):
    """Destination unreachable under the given metric."""


class SearchBudgetExceeded(RoutingError):
    """Exhaustive enumeration would exceed the configured guard."""


class LocalMinimum(RoutingError):
    """Greedy forwarding found no neighbor with a smaller distance."""


class InvalidRoute(RoutingError):
    """A route handed to the replayer is not a valid path for the flow."""


# -- scenario files and reports ----------------------------------------------

class SchemaError(MeshMetricsError):
    """A scenario file is structurally malformed."""


class InvariantViolation(MeshMetricsError):
    """A scenario file is well-formed but violates a semantic bound."""


class IoError(MeshMetricsError):
    """Reading or writing a report file failed."""
