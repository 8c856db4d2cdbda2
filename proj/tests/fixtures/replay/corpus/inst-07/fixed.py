import json
# inst-07: langchain agent

def helper():
    return 1


def run_agent(base):
    value = base
    return value + helper() + 1


def unused():
    return json.dumps({})
