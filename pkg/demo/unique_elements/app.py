"""Distinct values of a stream, kept in a UniqueCon."""

import sys


def collect(values):
    unique = UniqueCon.new()
    for value in values:
        unique.insert(value)
    return unique


def summary(values, queries):
    """Number of distinct values, and the queries that occur among them"""
    unique = collect(values)
    return unique.len(), [p for p in queries if unique.contains(p)]


if __name__ == "__main__":
    numbers = [int(arg) for arg in sys.argv[1:]]
    count, _ = summary(numbers, [])
    print(f"{count} distinct values")
