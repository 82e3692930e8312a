import operator

key = lambda pair: operator.itemgetter(0)(pair)
