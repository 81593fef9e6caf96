"""Token framing, hybrid screen payloads and WAN cost simulation for semantic media transport."""

__version__ = "0.1.0"
