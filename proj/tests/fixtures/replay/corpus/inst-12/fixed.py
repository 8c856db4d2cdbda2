import json
# inst-12: llamaindex agent

def helper():
    return 1


def run_agent(base):
    value = base
    return value + helper() + 1


def unused():
    return json.dumps({})
