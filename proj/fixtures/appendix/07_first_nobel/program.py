def search():
    messages = ''
    first_winners, msg = find_entity_or_value(entity_aliases = ['Nobel Prize'], relation_aliases = ['first winner', 'first recipient'])
    messages += msg
    for winner in first_winners:
        award, msg = find_entity_or_value(entity_aliases = [winner], relation_aliases = ['awarded', 'award'])
        messages += msg
    return messages
