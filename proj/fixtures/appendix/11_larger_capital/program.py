def search():
    messages = ''
    ew_capital, msg = find_entity_or_value(entity_aliases = ['Dongwu Securities'], relation_aliases = ['registered capital', 'capital'])
    messages += msg
    xy_capital, msg = find_entity_or_value(entity_aliases = ['Xingye Securities'], relation_aliases = ['registered capital', 'capital'])
    messages += msg
    if ew_capital and xy_capital:
        if ew_capital[0] > xy_capital[0]:
            messages += 'Dongwu Securities has a larger registered capital.'
        elif ew_capital[0] < xy_capital[0]:
            messages += 'Xingye Securities has a larger registered capital.'
        else:
            messages += 'Dongwu Securities and Xingye Securities have the same registered capital.'
    return messages
