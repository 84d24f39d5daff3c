def segment_table(counts):
    lines = ["segment            members"]
    for seg in sorted(counts):
        lines.append("%-18s %7d" % (seg, counts[seg]))
    return "\n".join(lines)


def vip_entry(name, zip_code):
    return f"{name} <{zip_code}>"
