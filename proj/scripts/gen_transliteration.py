#!/usr/bin/env python3
"""Regenerate src/transliteration_table.inc from the unidecode package.

Usage: python3 scripts/gen_transliteration.py > src/transliteration_table.inc
"""
from unidecode import unidecode

RANGES = [
    (0x0080, 0x024F),  # Latin-1 Supplement, Latin Extended-A/B
    (0x0250, 0x02FF),  # IPA, spacing modifiers
    (0x0300, 0x036F),  # combining diacritics
    (0x0370, 0x03FF),  # Greek
    (0x0400, 0x04FF),  # Cyrillic
    (0x1E00, 0x1EFF),  # Latin Extended Additional
    (0x2000, 0x206F),  # General Punctuation
    (0x20A0, 0x20CF),  # currency
    (0x2100, 0x214F),  # letterlike
    (0x2150, 0x218F),  # number forms
    (0xFB00, 0xFB06),  # ligatures
]


def escape(s):
    out = []
    for ch in s:
        if ch in '\\"':
            out.append('\\' + ch)
        elif 0x20 <= ord(ch) < 0x7F:
            out.append(ch)
        else:
            out.append('\\x%02x' % ord(ch))
    return ''.join(out)


print("// Generated by scripts/gen_transliteration.py. Do not edit.")
for lo, hi in RANGES:
    for cp in range(lo, hi + 1):
        s = unidecode(chr(cp))
        print('{0x%04X, "%s"},' % (cp, escape(s)))
