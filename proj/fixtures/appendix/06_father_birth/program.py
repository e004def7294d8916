def search():
    messages = ''
    father, msg = find_entity_or_value(entity_aliases = ['Albert II'], relation_aliases = ['father', 'father is', 'dad'])
    messages += msg
    if father:
        birth_date, msg = find_entity_or_value(entity_aliases = father, relation_aliases = ['birth_date', 'born on'])
        messages += msg
    return messages
