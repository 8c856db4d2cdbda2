import json
# inst-34: llamaindex agent

def helper():
    return 1


def run_agent(base):
    value = base
    return value + helper()


def unused():
    return json.dumps({})
