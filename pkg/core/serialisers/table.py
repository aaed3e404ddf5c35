import csv
import io

FLOAT_FORMAT = '.17g'


def format_number(value):
    return format(float(value), FLOAT_FORMAT)


def dumps_csv(columns, rows):
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(columns)
    for row in rows:
        writer.writerow([format_number(value) for value in row])
    return buffer.getvalue()


def loads_csv(text):
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    rows = [[float(value) for value in row] for row in reader if row]
    return header, rows


def write_csv(path, columns, rows):
    with open(path, 'w', encoding='utf-8', newline='') as file:
        file.write(dumps_csv(columns, rows))


def read_csv(path):
    with open(path, 'r', encoding='utf-8', newline='') as file:
        return loads_csv(file.read())
