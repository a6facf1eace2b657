"""Self-contained numpy actor-critic stack (MLP, Adam, SAC / MASAC)."""
