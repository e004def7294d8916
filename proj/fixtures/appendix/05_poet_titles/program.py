def search():
    messages = ''
    author, msg = find_entity_or_value(entity_aliases = ['Quiet Night Thoughts'], relation_aliases = ['author', 'creator', 'writer'])
    messages += msg
    titles, msg = find_entity_or_value(entity_aliases = author, relation_aliases = ['title', 'also known as', 'appellation'])
    messages += msg
    return messages
