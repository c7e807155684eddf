#!/usr/bin/env python3
"""Builds the PDF fixtures used by the test suites.

Written independently of the Rust PDF writer so the reader is tested against
files it did not produce. Run from this directory; every output is checked
with pypdf afterwards.
"""
import io
import zlib

HELLO = b"BT /F1 24 Tf 72 720 Td (Hello) Tj ET"

FOREIGN_XMP = b"""<?xpacket begin="\xef\xbb\xbf" id="W5M0MpCehiHzreSzNTczkc9d"?>
<x:xmpmeta xmlns:x="adobe:ns:meta/">
  <rdf:RDF xmlns:rdf="http://www.w3.org/1999/02/22-rdf-syntax-ns#">
    <rdf:Description rdf:about="" xmlns:xmp="http://ns.adobe.com/xap/1.0/" xmlns:dc="http://purl.org/dc/elements/1.1/">
      <xmp:CreatorTool>LaTeX with hyperref</xmp:CreatorTool>
      <dc:title><rdf:Alt><rdf:li xml:lang="x-default">Generic</rdf:li></rdf:Alt></dc:title>
    </rdf:Description>
  </rdf:RDF>
</x:xmpmeta>
<?xpacket end="w"?>"""


def stream_obj(dict_body: bytes, data: bytes) -> bytes:
    return b"<< " + dict_body + b" /Length %d >>\nstream\n" % len(data) + data + b"\nendstream"


def classic(objects, root=1, info=None, header=b"%PDF-1.4\n%\xe2\xe3\xcf\xd3\n"):
    """objects: list of (number, body bytes). Returns bytes with a classic xref."""
    out = io.BytesIO()
    out.write(header)
    offsets = {}
    for num, body in objects:
        offsets[num] = out.tell()
        out.write(b"%d 0 obj\n" % num + body + b"\nendobj\n")
    size = max(offsets) + 1
    xref = out.tell()
    out.write(b"xref\n0 %d\n" % size)
    out.write(b"0000000000 65535 f \n")
    for n in range(1, size):
        if n in offsets:
            out.write(b"%010d 00000 n \n" % offsets[n])
        else:
            out.write(b"0000000000 00000 f \n")
    trailer = b"/Size %d /Root %d 0 R" % (size, root)
    if info:
        trailer += b" /Info %d 0 R" % info
    trailer += b" /ID [<00112233445566778899AABBCCDDEEFF> <00112233445566778899AABBCCDDEEFF>]"
    out.write(b"trailer\n<< " + trailer + b" >>\nstartxref\n%d\n%%%%EOF\n" % xref)
    return out.getvalue(), xref, size


def page_objects(catalog_extra=b""):
    return [
        (1, b"<< /Type /Catalog /Pages 2 0 R" + catalog_extra + b" >>"),
        (2, b"<< /Type /Pages /Kids [3 0 R] /Count 1 >>"),
        (3, b"<< /Type /Page /Parent 2 0 R /MediaBox [0 0 612 792] /Resources << /Font << /F1 5 0 R >> >> /Contents 4 0 R >>"),
        (4, stream_obj(b"", HELLO)),
        (5, b"<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica >>"),
        (6, b"<< /Title (Minimal fixture) /Producer (make_fixtures.py) >>"),
    ]


def minimal():
    data, _, _ = classic(page_objects(), info=6)
    return data


def foreign_metadata():
    objs = page_objects(b" /Metadata 7 0 R")
    compressed = zlib.compress(FOREIGN_XMP)
    objs.append((7, stream_obj(b"/Type /Metadata /Subtype /XML /Filter /FlateDecode", compressed)))
    data, _, _ = classic(objs, info=6)
    return data


def updated():
    """minimal plus one incremental update replacing the Info dictionary."""
    base, xref, size = classic(page_objects(), info=6)
    out = io.BytesIO()
    out.write(base)
    off = out.tell()
    out.write(b"6 0 obj\n<< /Title (Updated fixture) /Producer (make_fixtures.py) >>\nendobj\n")
    new_xref = out.tell()
    out.write(b"xref\n6 1\n%010d 00000 n \n" % off)
    out.write(b"trailer\n<< /Size %d /Root 1 0 R /Info 6 0 R /Prev %d >>\nstartxref\n%d\n%%%%EOF\n" % (size, xref, new_xref))
    return out.getvalue()


def png_up(rows, columns):
    out = bytearray()
    prev = bytes(columns)
    for row in rows:
        out.append(2)
        out.extend((row[i] - prev[i]) & 0xFF for i in range(columns))
        prev = row
    return bytes(out)


def xref_stream():
    """PDF 1.5 layout: catalog and page tree inside a compressed object
    stream, cross references in a predictor-encoded xref stream."""
    out = io.BytesIO()
    out.write(b"%PDF-1.5\n%\xe2\xe3\xcf\xd3\n")
    in_stream = [
        (1, b"<< /Type /Catalog /Pages 2 0 R >>"),
        (2, b"<< /Type /Pages /Kids [3 0 R] /Count 1 >>"),
        (3, b"<< /Type /Page /Parent 2 0 R /MediaBox [0 0 612 792] /Resources << /Font << /F1 5 0 R >> >> /Contents 4 0 R >>"),
        (5, b"<< /Type /Font /Subtype /Type1 /BaseFont /Helvetica >>"),
    ]
    bodies = b""
    header = b""
    for num, body in in_stream:
        header += b"%d %d " % (num, len(bodies))
        bodies += body + b"\n"
    objstm_data = zlib.compress(header + bodies)
    offsets = {}
    offsets[4] = out.tell()
    out.write(b"4 0 obj\n" + stream_obj(b"", HELLO) + b"\nendobj\n")
    offsets[6] = out.tell()
    out.write(b"6 0 obj\n" + stream_obj(b"/Type /ObjStm /N %d /First %d /Filter /FlateDecode" % (len(in_stream), len(header)), objstm_data) + b"\nendobj\n")
    xref_off = out.tell()
    size = 8
    rows = [bytes([0, 0, 0, 255])]
    for n in range(1, size):
        if n in offsets:
            rows.append(bytes([1, offsets[n] >> 8, offsets[n] & 0xFF, 0]))
        elif n == 7:
            rows.append(bytes([1, xref_off >> 8, xref_off & 0xFF, 0]))
        else:
            idx = [num for num, _ in in_stream].index(n)
            rows.append(bytes([2, 0, 6, idx]))
    data = zlib.compress(png_up(rows, 4))
    dict_body = (b"/Type /XRef /Size %d /W [1 2 1] /Root 1 0 R /Filter /FlateDecode "
                 b"/DecodeParms << /Predictor 12 /Columns 4 >>" % size)
    out.write(b"7 0 obj\n" + stream_obj(dict_body, data) + b"\nendobj\n")
    out.write(b"startxref\n%d\n%%%%EOF\n" % xref_off)
    return out.getvalue()


def check(path, expect_pages=1):
    from pypdf import PdfReader
    reader = PdfReader(path, strict=True)
    assert len(reader.pages) == expect_pages, path
    assert "Hello" in reader.pages[0].extract_text(), path


if __name__ == "__main__":
    fixtures = {
        "minimal.pdf": minimal(),
        "foreign_metadata.pdf": foreign_metadata(),
        "updated.pdf": updated(),
        "xref_stream.pdf": xref_stream(),
    }
    for name, data in fixtures.items():
        with open(name, "wb") as f:
            f.write(data)
        check(name)
        print(f"{name}: {len(data)} bytes, ok")
