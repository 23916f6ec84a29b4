#!/usr/bin/env python3
"""Regenerate data/fixtures/corpus_fixture.tsv.

Deterministic synthetic corpus shaped like filtered NVD data: 25 records per
year for 1999-2018, era-appropriate component names, CVSS-2 label patterns
with severities computed from the real v2 base-score formula, and three
planted descriptions made of tokens that appear nowhere else in the corpus
(the out-of-vocabulary cases the drift tests look for).

Every non-planted description contains the word "allows", which guarantees a
vocabulary hit against any earlier year, so the planted records are the only
all-zero cases by construction.
"""

import sys

YEARS = range(1999, 2019)
PER_YEAR = 25

# (component, first_year) pools; a record uses components visible in its era.
COMPONENTS = [
    ("Sendmail", 1999), ("wu-ftpd", 1999), ("BIND", 1999), ("Apache HTTP Server", 1999),
    ("Microsoft IIS", 1999), ("Solaris telnetd", 1999), ("ProFTPD", 1999),
    ("the CGI search module", 1999), ("OpenSSH", 2000), ("PHP", 2001),
    ("Internet Explorer", 2001), ("MySQL Server", 2002), ("Mozilla Firefox", 2004),
    ("the ActiveX control in WebView", 2004), ("WordPress", 2005), ("Joomla!", 2006),
    ("Adobe Flash Player", 2006), ("Apple QuickTime", 2006), ("Drupal", 2007),
    ("Google Chrome", 2009), ("the Android media framework", 2009), ("Oracle Java SE", 2010),
    ("the Linux kernel netfilter subsystem", 2010), ("jQuery", 2011), ("OpenSSL", 2011),
    ("Adobe ColdFusion", 2012), ("Apache Struts", 2012), ("Node.js", 2014),
    ("Docker Engine", 2014), ("the IoT camera firmware", 2015), ("Kubernetes", 2016),
    ("the Electron framework", 2016), ("systemd", 2016), ("TensorFlow", 2017),
    ("the microservice API gateway", 2017),
]

PARAMS = ["id", "name", "query", "path", "page", "user", "filename", "callback",
          "redirect", "title", "category", "session", "token", "lang"]
FILES = ["index.php", "admin.php", "login.asp", "search.cgi", "view.jsp",
         "upload.c", "parser.c", "net/socket.c", "auth.py", "handler.go"]
PROTOCOLS = ["HTTP", "FTP", "DNS", "SMTP", "TLS", "RPC", "SNMP", "LDAP"]
FILETYPES = ["PNG", "JPEG", "PDF", "XML", "ZIP", "MP4", "TIFF", "JSON"]
FUNCTIONS = ["parse_header", "read_packet", "do_auth", "copy_block",
             "decode_frame", "handle_request", "format_string", "load_config"]

TEMPLATES = [
    "Buffer overflow in {comp} {ver} allows remote attackers to execute arbitrary "
    "code via a long {param} parameter.",
    "Cross-site scripting (XSS) vulnerability in {comp} {ver} allows remote attackers "
    "to inject arbitrary web script or HTML via the {param} parameter.",
    "SQL injection vulnerability in {file} in {comp} {ver} allows remote attackers to "
    "execute arbitrary SQL commands via the {param} parameter.",
    "{comp} {ver} allows remote attackers to cause a denial of service (crash) via a "
    "malformed {proto} request.",
    "Directory traversal vulnerability in {comp} {ver} allows remote attackers to read "
    "arbitrary files via a .. (dot dot) in the {param} parameter.",
    "Integer overflow in {comp} {ver} allows remote attackers to execute arbitrary code "
    "via a crafted {ftype} file.",
    "The {func} function in {file} in {comp} before {ver} allows local users to gain "
    "privileges via a crafted {param} argument.",
    "Use-after-free vulnerability in {comp} {ver} allows remote attackers to execute "
    "arbitrary code or cause a denial of service via a crafted web page.",
]

# CVSS-2 metric letters per pattern: (AV, AC, Au, C, I, A)
LABEL_PATTERNS = [
    ("N", "L", "N", "P", "P", "P"),
    ("N", "L", "N", "N", "N", "P"),
    ("N", "M", "N", "N", "P", "N"),
    ("N", "L", "N", "C", "C", "C"),
    ("L", "L", "N", "C", "C", "C"),
    ("N", "H", "S", "P", "N", "N"),
    ("A", "M", "N", "P", "P", "N"),
    ("L", "M", "N", "N", "N", "C"),
    ("N", "L", "S", "P", "P", "P"),
    ("N", "H", "N", "N", "P", "N"),
    ("L", "H", "M", "P", "P", "N"),
    ("A", "L", "M", "N", "P", "P"),
]

AV_W = {"L": 0.395, "A": 0.646, "N": 1.0}
AC_W = {"H": 0.35, "M": 0.61, "L": 0.71}
AU_W = {"M": 0.45, "S": 0.56, "N": 0.704}
IMPACT_W = {"N": 0.0, "P": 0.275, "C": 0.660}
AV_NAME = {"L": "Local", "A": "AdjacentNetwork", "N": "Network"}
AC_NAME = {"L": "Low", "M": "Medium", "H": "High"}
AU_NAME = {"N": "None", "S": "Single", "M": "Multiple"}
IMPACT_NAME = {"N": "None", "P": "Partial", "C": "Complete"}

# Planted out-of-vocabulary records: every token (after preprocessing) must be
# unique to its record. Shapes mimic the terse product-only descriptions that
# produce all-zero word features in practice.
PLANTED = {
    2016: ("Pyxleron Dashforge 1.0.3939 clickjacking.",
           ("N", "M", "N", "N", "P", "N")),
    2017: ("Vermiglio Sandrift 2.7.4471 craquelure overlay.",
           ("N", "L", "N", "P", "P", "P")),
    2018: ("Quenzal Brickmoor 9.0.2652 typosquatting.",
           ("N", "L", "N", "N", "N", "P")),
}


def cvss2_base_score(av, ac, au, c, i, a):
    impact = 10.41 * (1 - (1 - IMPACT_W[c]) * (1 - IMPACT_W[i]) * (1 - IMPACT_W[a]))
    exploitability = 20 * AV_W[av] * AC_W[ac] * AU_W[au]
    f = 0.0 if impact == 0 else 1.176
    return round(((0.6 * impact) + (0.4 * exploitability) - 1.5) * f, 1)


def severity_name(score):
    if score < 4.0:
        return "Low"
    if score < 7.0:
        return "Medium"
    return "High"


def components_for(year):
    return [c for c, first in COMPONENTS if first <= year]


def make_record(year, slot):
    idx = (year - 1999) * PER_YEAR + slot
    pool = components_for(year)
    comp = pool[(idx + slot * (slot + 1) // 2) % len(pool)]
    template = TEMPLATES[idx % len(TEMPLATES)]
    ver = f"{(idx % 9) + 1}.{(idx * 3) % 10}.{(slot * 5) % 10}"
    desc = template.format(
        comp=comp, ver=ver,
        param=PARAMS[(idx + slot) % len(PARAMS)],
        file=FILES[idx % len(FILES)],
        proto=PROTOCOLS[idx % len(PROTOCOLS)],
        ftype=FILETYPES[idx % len(FILETYPES)],
        func=FUNCTIONS[idx % len(FUNCTIONS)],
    )
    pattern = LABEL_PATTERNS[idx % len(LABEL_PATTERNS)]
    return desc, pattern


def main(out_path):
    lines = [
        "# driftva corpus v1",
        "# cve_id\tyear\tdescription\tconfidentiality\tintegrity\tavailability\t"
        "access_vector\taccess_complexity\tauthentication\tseverity",
    ]
    for year in YEARS:
        for slot in range(PER_YEAR):
            cve = f"CVE-{year}-{1000 + slot}"
            if slot == PER_YEAR - 1 and year in PLANTED:
                desc, pattern = PLANTED[year]
            else:
                desc, pattern = make_record(year, slot)
            av, ac, au, c, i, a = pattern
            sev = severity_name(cvss2_base_score(av, ac, au, c, i, a))
            lines.append("\t".join([
                cve, str(year), desc,
                IMPACT_NAME[c], IMPACT_NAME[i], IMPACT_NAME[a],
                AV_NAME[av], AC_NAME[ac], AU_NAME[au], sev,
            ]))
    with open(out_path, "w") as f:
        f.write("\n".join(lines) + "\n")
    print(f"wrote {sum(1 for l in lines if not l.startswith('#'))} records to {out_path}")


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else "data/fixtures/corpus_fixture.tsv")
