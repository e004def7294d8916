def search():
    messages = ''
    capital, msg = find_entity_or_value(entity_aliases = ['Dongwu Securities'], relation_aliases = ['Registered Capital', 'Capital'])
    messages += msg
    return messages
