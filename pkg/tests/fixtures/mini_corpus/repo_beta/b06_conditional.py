import collections

if flag:
    collections.OrderedDict()
