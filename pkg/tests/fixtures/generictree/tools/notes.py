def summarize(rows):
    return len(rows)

# archived reference material below
# @sketchlink 0dead0002-0000-4000-8000-0000000000d2
