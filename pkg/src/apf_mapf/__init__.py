"""Multi-agent path finding on 4-connected grids, with artificial potential field guidance."""
