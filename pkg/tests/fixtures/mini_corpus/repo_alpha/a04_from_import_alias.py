from pandas import DataFrame as DF

DF(data)
DF.from_records(rows)
