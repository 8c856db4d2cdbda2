from buggy import run_agent

result = run_agent(40)
assert result == 42, f"expected 42, got {result}"
print("ok")
