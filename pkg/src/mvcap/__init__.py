"""mvcap: synchronized multi-view capture testbed.

A simulated-network rebuild of a trigger-relay capture system (delay
compensation, datagram relay, framed record streaming) together with the
reconstruction it feeds: pairwise-seeded joint refinement for 3D skeletons
and silhouette-based visual hull carving.
"""

__version__ = "0.1.0"
