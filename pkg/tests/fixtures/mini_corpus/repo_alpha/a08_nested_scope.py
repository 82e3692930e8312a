import json


def dump_all(payload):
    return json.dumps(payload)


def rebind():
    json = {}
    return json.keys()
