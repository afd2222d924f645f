"""Exact p-adic computations on ramified towers and over the Iwasawa algebra."""
