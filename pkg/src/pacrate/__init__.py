"""Rate-profile optimization and FER simulation for PAC codes."""
