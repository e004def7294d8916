def search():
    messages = ''
    lyricist, msg = find_entity_or_value(entity_aliases = ['Li Bai'], relation_aliases = ['lyrics writing', 'lyricist'])
    messages += msg
    composer, msg = find_entity_or_value(entity_aliases = ['Li Bai'], relation_aliases = ['compose', 'composer'])
    messages += msg
    arranger, msg = find_entity_or_value(entity_aliases = ['Li Bai'], relation_aliases = ['arrange', 'arranger'])
    messages += msg
    if lyricist == composer == arranger:
        messages += 'The lyricist, composer, and arranger of ''Li Bai'' are the same person.'
    else:
        messages += 'The lyricist, composer, and arranger of ''Li Bai'' are not the same person.'
    return messages
