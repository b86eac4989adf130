"""Benchmark harness: video ingestion, PSNR and rate sweeps."""
